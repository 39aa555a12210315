// Algorithm 1: shuffling proximal gradient for the smoothed compositional
// problem, plus its theorem-derived parameter calculator and a compositional
// SGD baseline with exponential tracking of F.
#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "minimax/estimators.hpp"
#include "minimax/linalg.hpp"
#include "minimax/metrics.hpp"
#include "minimax/problem.hpp"
#include "minimax/prox.hpp"
#include "minimax/rng.hpp"

namespace minimax {

enum class GammaSchedule { kConstant, kDecreasing };

struct ConfigNL {
  double eta = 0.0;    // <= 0 -> auto from epsilon
  long T = 0;          // <= 0 -> auto from epsilon
  double epsilon = 0.1;
  GammaSchedule gamma_schedule = GammaSchedule::kConstant;
  double gamma = 0.5;  // constant-schedule value
  int option = 1;      // F estimator option (1 or 2)
  PermutationMode permutation_mode = PermutationMode::kRandomIndependent;
  std::uint64_t seed = 0;
  bool auto_random_mode = false;  // random-permutation auto formulas
  bool record_objective = true;   // Psi_gamma costs one extra pass per epoch
  double target_grad_norm = 0.0;  // > 0: stop once ||G_eta|| reaches it
  int trace_stride = 1;           // record every k-th epoch (and the last)
  double sgd_tracking_weight = 0.9;  // baseline only
};

struct EpochRecordNL {
  long t = 0;
  double psi_gamma = 0.0;
  double grad_map_norm = 0.0;
  double gamma = 0.0;
  long f_evals = 0;    // cumulative
  long jac_evals = 0;  // cumulative
  double wall_ms = 0.0;
};

enum class SolveStatus { kOk, kAborted };

struct SolveResultNL {
  DenseVec w_final;
  std::vector<EpochRecordNL> trace;
  SolveStatus status = SolveStatus::kOk;
  DenseVec w_best;      // argmin of recorded ||G_eta|| (earliest minimum)
  long best_epoch = 0;
  double best_norm = 0.0;
  double eta_used = 0.0;
  long T_planned = 0;
};

// ---------------------------------------------------------------------------
// Step-size/epoch calculator.

struct AutoParamsNL {
  double eta = 0.0;
  long T = 0;
  bool capped = false;  // eta hit the 1/(8 Q_gamma) cap
};

// floor with a relative guard so that values that are integers in exact
// arithmetic (e.g. 16 * 2 / 0.1^3) do not land one below after rounding.
inline long floor_guard(double x) {
  return static_cast<long>(std::floor(x + std::fabs(x) * 1e-12));
}

// gap = Psi_0(w0) - Psi_0* + gamma B_{phi_0} (caller supplies its estimate).
inline AutoParamsNL auto_params_nl_raw(double Q_gamma, double M_h, double K_norm,
                                       double sigma_J, double Lambda1,
                                       double epsilon, double gap, long n,
                                       bool random_mode) {
  if (epsilon <= 0.0) throw std::invalid_argument("auto_params_nl: epsilon <= 0");
  if (Q_gamma <= 0.0) throw std::invalid_argument("auto_params_nl: Q_gamma <= 0");
  AutoParamsNL out;
  const double cap = 1.0 / (8.0 * Q_gamma);
  const double base = 4.0 * M_h * M_h * K_norm * K_norm * sigma_J * sigma_J;
  const double V = base + (random_mode ? n * Lambda1 : Lambda1);
  const double root = std::sqrt(2.0 * Q_gamma * V);
  const double sqn = random_mode ? std::sqrt(static_cast<double>(n)) : 1.0;
  if (V > 0.0) {
    const double eta_raw = sqn * epsilon / root;
    out.capped = eta_raw > cap;
    out.eta = out.capped ? cap : eta_raw;
  } else {
    out.capped = true;
    out.eta = cap;
  }
  const double e3 = epsilon * epsilon * epsilon;
  const double branch_sq = root / (sqn * e3);                   // O(eps^-3)
  const double branch_cap = 4.0 * Q_gamma / (epsilon * epsilon);  // O(eps^-2)
  out.T = floor_guard(16.0 * std::max(branch_sq, branch_cap) * gap);
  if (out.T < 1) out.T = 1;
  return out;
}

enum class AutoModeNL { kDeterministic, kRandom };

inline AutoParamsNL auto_params_nl(const ProblemNL& prob, const SmoothingSpec& s,
                                   double epsilon, AutoModeNL mode,
                                   const DenseVec& w0) {
  const ConstantsNL& c = prob.constants;
  const double M_h = prob.h.domain_bound;
  const DerivedNL d = derive_nl(c.M_F, c.L_F, M_h, prob.K.norm_bound,
                                prob.h.strong_convexity, s.gamma);
  // Psi_0(w0) is bracketed by Psi_gamma(w0) + gamma B, so the gap estimate is
  // an upper bound; a larger T keeps the guarantee.
  const double psi0_upper = psi_gamma(prob, w0, s) + s.gamma * s.b_sup;
  const double gap = psi0_upper - c.Psi0_lower_bound + s.gamma * s.b_sup;
  return auto_params_nl_raw(d.Q_gamma, M_h, prob.K.norm_bound, c.sigma_J,
                            c.Lambda1, epsilon, std::max(gap, 0.0), prob.n,
                            mode == AutoModeNL::kRandom);
}

// ---------------------------------------------------------------------------
// Algorithm 1.

namespace detail_nl {

inline double gamma_at(const ConfigNL& cfg, long t /*1-based epoch*/) {
  if (cfg.gamma_schedule == GammaSchedule::kConstant) return cfg.gamma;
  return 1.0 / (2.0 * std::cbrt(static_cast<double>(t)));  // 1/(2 (t0+1)^{1/3})
}

}  // namespace detail_nl

// s_base supplies the smoothing anchor and bounds; gamma is overridden per
// epoch by the schedule.
inline SolveResultNL solve_nl(const ProblemNL& prob, const DenseVec& w0,
                              const ConfigNL& cfg_in, const SmoothingSpec& s_base) {
  if (static_cast<int>(w0.size()) != prob.p)
    throw std::invalid_argument("solve_nl: w0 dimension mismatch");
  ConfigNL cfg = cfg_in;
  SolveResultNL res;
  if (cfg.eta <= 0.0 || cfg.T <= 0) {
    SmoothingSpec s0 = s_base;
    s0.gamma = detail_nl::gamma_at(cfg, 1);
    const AutoParamsNL ap = auto_params_nl(
        prob, s0, cfg.epsilon,
        cfg.auto_random_mode ? AutoModeNL::kRandom : AutoModeNL::kDeterministic, w0);
    if (cfg.eta <= 0.0) cfg.eta = ap.eta;
    if (cfg.T <= 0) cfg.T = ap.T;
  }
  res.eta_used = cfg.eta;
  res.T_planned = cfg.T;

  Rng rng(cfg.seed);
  DenseVec w_tilde = w0;
  long f_evals = 0, jac_evals = 0;
  res.best_norm = std::numeric_limits<double>::infinity();
  const auto t_start = std::chrono::steady_clock::now();

  for (long t = 1; t <= cfg.T; ++t) {
    SmoothingSpec s = s_base;
    s.gamma = detail_nl::gamma_at(cfg, t);
    const PermutationPair perm = sample_permutations(
        prob.n, cfg.permutation_mode, rng.stream("pi", t), rng.stream("pi_hat", t));

    const DenseVec w_epoch0 = w_tilde;
    DenseVec w = w_tilde;
    bool ok = true;
    if (cfg.option == 1) {
      std::vector<DenseVec> at_w0(prob.n);
      for (int j = 0; j < prob.n; ++j)
        at_w0[j] = prob.eval_F_i(perm.pi[j], w_epoch0);
      f_evals += prob.n;
      Option1State state(std::move(at_w0));
      for (int i = 1; i <= prob.n; ++i) {
        const DenseVec fresh = prob.eval_F_i(perm.pi[i - 1], w);
        ++f_evals;
        const DenseVec F_est = state.advance(fresh);
        const DenseVec d = hyper_gradient_nl(prob, perm.pi_hat[i - 1], w, F_est, s);
        ++jac_evals;
        axpy_in(-cfg.eta / prob.n, d, w);
        if (!all_finite(w)) { ok = false; break; }
      }
    } else {
      const DenseVec F_est = estimate_F_option2(prob, w_epoch0);
      f_evals += prob.n;
      for (int i = 1; i <= prob.n; ++i) {
        const DenseVec d = hyper_gradient_nl(prob, perm.pi_hat[i - 1], w, F_est, s);
        ++jac_evals;
        axpy_in(-cfg.eta / prob.n, d, w);
        if (!all_finite(w)) { ok = false; break; }
      }
    }

    if (ok) w_tilde = prob.f.prox(w, cfg.eta);

    // metrics pass (not counted against the oracle-complexity budget)
    EpochRecordNL rec;
    rec.t = t;
    rec.gamma = s.gamma;
    rec.f_evals = f_evals;
    rec.jac_evals = jac_evals;
    if (ok) {
      const DenseVec gphi = grad_phi_gamma_exact(prob, w_tilde, s);
      rec.grad_map_norm = nrm2(grad_mapping_w(w_tilde, gphi, prob.f, cfg.eta));
      rec.psi_gamma = cfg.record_objective
                          ? psi_gamma(prob, w_tilde, s)
                          : std::numeric_limits<double>::quiet_NaN();
    } else {
      rec.grad_map_norm = std::numeric_limits<double>::quiet_NaN();
      rec.psi_gamma = std::numeric_limits<double>::quiet_NaN();
    }
    rec.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t_start)
                      .count();

    const bool keep = (cfg.trace_stride <= 1) || (t % cfg.trace_stride == 0) ||
                      t == cfg.T || !ok;
    if (keep) res.trace.push_back(rec);

    if (!ok) {
      res.status = SolveStatus::kAborted;
      res.w_final = w_tilde;
      return res;
    }
    if (rec.grad_map_norm < res.best_norm) {
      res.best_norm = rec.grad_map_norm;
      res.best_epoch = t;
      res.w_best = w_tilde;
    }
    if (cfg.target_grad_norm > 0.0 && rec.grad_map_norm <= cfg.target_grad_norm) {
      if (!keep) res.trace.push_back(rec);
      break;
    }
  }
  res.w_final = w_tilde;
  if (res.w_best.empty()) {
    res.w_best = w_tilde;
    res.best_epoch = cfg.T;
  }
  return res;
}

// ---------------------------------------------------------------------------
// Compositional SGD baseline: i.i.d. component sampling with an exponentially
// averaged tracking estimate of F(w). Same trace schema as solve_nl.

inline SolveResultNL compositional_sgd_baseline(const ProblemNL& prob,
                                                const DenseVec& w0,
                                                const ConfigNL& cfg_in,
                                                const SmoothingSpec& s_base) {
  if (static_cast<int>(w0.size()) != prob.p)
    throw std::invalid_argument("compositional_sgd_baseline: w0 dimension mismatch");
  ConfigNL cfg = cfg_in;
  if (cfg.eta <= 0.0) cfg.eta = cfg.epsilon;
  if (cfg.T <= 0) cfg.T = 100;
  SolveResultNL res;
  res.eta_used = cfg.eta;
  res.T_planned = cfg.T;

  Rng rng(cfg.seed);
  RngStream pick = rng.stream("iid");
  DenseVec w_tilde = w0;
  DenseVec v;  // tracking estimate of F(w); weight 1 on the first sample
  long f_evals = 0, jac_evals = 0;
  res.best_norm = std::numeric_limits<double>::infinity();
  const double beta = cfg.sgd_tracking_weight;
  const auto t_start = std::chrono::steady_clock::now();

  for (long t = 1; t <= cfg.T; ++t) {
    SmoothingSpec s = s_base;
    s.gamma = detail_nl::gamma_at(cfg, t);
    DenseVec w = w_tilde;
    bool ok = true;
    for (int step = 0; step < prob.n; ++step) {
      const int i = 1 + pick.uniform_int(prob.n);
      const DenseVec Fi = prob.eval_F_i(i, w);
      ++f_evals;
      if (v.empty())
        v = Fi;
      else {
        for (std::size_t k = 0; k < v.size(); ++k)
          v[k] = (1.0 - beta) * v[k] + beta * Fi[k];
      }
      const DenseVec d = hyper_gradient_nl(prob, i, w, v, s);
      ++jac_evals;
      axpy_in(-cfg.eta / prob.n, d, w);
      if (!all_finite(w)) { ok = false; break; }
    }
    if (ok) w_tilde = prob.f.prox(w, cfg.eta);

    EpochRecordNL rec;
    rec.t = t;
    rec.gamma = s.gamma;
    rec.f_evals = f_evals;
    rec.jac_evals = jac_evals;
    if (ok) {
      const DenseVec gphi = grad_phi_gamma_exact(prob, w_tilde, s);
      rec.grad_map_norm = nrm2(grad_mapping_w(w_tilde, gphi, prob.f, cfg.eta));
      rec.psi_gamma = cfg.record_objective
                          ? psi_gamma(prob, w_tilde, s)
                          : std::numeric_limits<double>::quiet_NaN();
    } else {
      rec.grad_map_norm = std::numeric_limits<double>::quiet_NaN();
      rec.psi_gamma = std::numeric_limits<double>::quiet_NaN();
    }
    rec.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t_start)
                      .count();
    const bool keep = (cfg.trace_stride <= 1) || (t % cfg.trace_stride == 0) ||
                      t == cfg.T || !ok;
    if (keep) res.trace.push_back(rec);
    if (!ok) {
      res.status = SolveStatus::kAborted;
      res.w_final = w_tilde;
      return res;
    }
    if (rec.grad_map_norm < res.best_norm) {
      res.best_norm = rec.grad_map_norm;
      res.best_epoch = t;
      res.w_best = w_tilde;
    }
  }
  res.w_final = w_tilde;
  if (res.w_best.empty()) {
    res.w_best = w_tilde;
    res.best_epoch = cfg.T;
  }
  return res;
}

}  // namespace minimax
