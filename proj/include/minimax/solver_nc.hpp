// Algorithm 2: shuffling descent on w with an inner maximizer on u, in two
// variants (semi: full prox-gradient ascent inner loop; full: shuffling ascent
// epochs), plus the theorem-derived parameter calculators for all regimes.
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
#include "minimax/solver_nl.hpp"  // SolveStatus

namespace minimax {

enum class NCRegime { kSemi, kFullMuH, kFullMuh, kFullS1 };

inline const char* nc_regime_name(NCRegime r) {
  switch (r) {
    case NCRegime::kSemi: return "semi";
    case NCRegime::kFullMuH: return "full-muH";
    case NCRegime::kFullMuh: return "full-muh";
    case NCRegime::kFullS1: return "full-s1";
  }
  return "?";
}

struct ConfigNC {
  NCRegime regime = NCRegime::kSemi;  // semi => full-ascent inner loop
  double eta = 0.0;      // <= 0 -> auto
  double eta_hat = 0.0;  // <= 0 -> auto
  long S = 0;            // <= 0 -> auto
  long T = 0;            // <= 0 -> auto
  double epsilon = 0.05;
  PermutationMode permutation_mode = PermutationMode::kRandomIndependent;
  std::uint64_t seed = 0;
  double s1_multiplier = 15.0;    // eta_hat = mult * kappa^2 * eta in full-s1
  bool record_objective = true;
  double target_grad_norm = 0.0;  // > 0: stop once ||G_eta|| reaches it
  int trace_stride = 1;
};

struct EpochRecordNC {
  long t = 0;
  double objective = 0.0;  // Psi_0 with the oracle, else L(w_t, u_t)
  double grad_map_norm_w = 0.0;
  double grad_map_norm_u = 0.0;
  double u_gap = 0.0;  // ||u_t - u*_0(w_{t-1})|| (NaN without the oracle)
  long gradw_evals = 0;  // cumulative component-gradient counts
  long gradu_evals = 0;
  double wall_ms = 0.0;
};

struct SolveResultNC {
  DenseVec w_final, u_final;
  std::vector<EpochRecordNC> trace;
  SolveStatus status = SolveStatus::kOk;
  DenseVec w_best;
  long best_epoch = 0;
  double best_norm = 0.0;
  double eta_used = 0.0, eta_hat_used = 0.0;
  long S_used = 0, T_planned = 0;
};

// ---------------------------------------------------------------------------
// Parameter calculators.

struct AutoParamsNC {
  double eta = 0.0;
  double eta_hat = 0.0;
  long S = 1;
  long T = 1;
};

// Scalars the calculator needs beyond the problem constants.
struct AutoInputsNC {
  double delta_psi = 1.0;  // Psi_0(w0) - Psi_0*
  double u_gap = 0.0;      // ||u0 - u*_0(w0)||
  double lagr_gap0 = 0.0;  // Psi_0(w0) - L(w0, u0)   (full-s1 only)
};

namespace detail_nc {

inline double safe_div(double num, double den) {
  return den > 0.0 ? num / den
                   : std::numeric_limits<double>::infinity();
}

}  // namespace detail_nc

// S = floor(ln(7/2) / (mu * eta_hat)) for the full-shuffling multi-epoch regimes.
inline long nc_full_inner_epochs(double mu, double eta_hat) {
  if (mu <= 0.0 || eta_hat <= 0.0)
    throw std::invalid_argument("nc_full_inner_epochs: need mu, eta_hat > 0");
  return floor_guard(std::log(3.5) / (mu * eta_hat));
}

// eta_hat = multiplier * kappa^2 * eta for the single-epoch (S = 1) regime.
inline double nc_s1_eta_hat(double kappa, double eta, double multiplier = 15.0) {
  return multiplier * kappa * kappa * eta;
}

inline AutoParamsNC auto_params_nc_raw(const ConstantsNC& c, double mu_h,
                                       NCRegime regime, double epsilon,
                                       const AutoInputsNC& in,
                                       double s1_multiplier = 15.0) {
  using detail_nc::safe_div;
  if (epsilon <= 0.0) throw std::invalid_argument("auto_params_nc: epsilon <= 0");
  const DerivedNC d = derive_nc(c.L_w, c.L_u, c.mu_H, mu_h);
  const double kappa = d.kappa, L_Phi0 = d.L_Phi0;
  const double Lw2 = c.L_w * c.L_w, Lu2 = c.L_u * c.L_u;
  const double sw2 = c.sigma_w * c.sigma_w, su2 = c.sigma_u * c.sigma_u;
  const double e2 = epsilon * epsilon, e3 = e2 * epsilon;
  AutoParamsNC out;

  switch (regime) {
    case NCRegime::kSemi: {
      // one-sided averaging weight omega = 1
      const double C0 = 2.0 * c.Lambda0 * Lw2 * (3.0 * c.Theta_w + 1.0);
      const double Cw = Lw2 * (3.0 * c.Theta_w + 1.0) * c.Lambda1 + 3.0 * Lw2 * sw2;
      const double s = 0.9;
      double eta = s * std::min(std::min(safe_div(1.0, 2.0 * std::sqrt(C0)),
                                         safe_div(1.0, 4.0 * L_Phi0)),
                                std::min(safe_div(1.0, 2.0 * c.L_u * kappa),
                                         safe_div(epsilon, 4.0 * std::sqrt(Cw))));
      if (!std::isfinite(eta) || eta <= 0.0)
        throw std::invalid_argument("auto_params_nc: degenerate semi constants");
      out.eta = eta;
      out.eta_hat = 1.0 / (c.L_u + c.mu_H);
      const double M_omega = 1.0 + (Lu2 * kappa * kappa + 2.0 * Lw2) * eta * eta;
      const double denom =
          2.0 * out.eta_hat * (mu_h + 4.0 * c.mu_H * c.L_u / (c.L_u + c.mu_H));
      out.S = std::max<long>(1, floor_guard(M_omega / denom));
      const double T1 =
          32.0 * std::sqrt(Cw) * in.delta_psi / (s * (1.0 - s * s) * e3);
      const double T2 = 4.0 * Lu2 * in.u_gap * in.u_gap / ((1.0 - s * s) * e2);
      out.T = std::max<long>(1, floor_guard(T1 + T2));
      break;
    }
    case NCRegime::kFullMuH:
    case NCRegime::kFullMuh: {
      const double mu_eff = (regime == NCRegime::kFullMuh) ? mu_h : c.mu_H;
      if (mu_eff <= 0.0)
        throw std::invalid_argument("auto_params_nc: regime needs its strong-concavity modulus > 0");
      const double Cw = Lw2 * ((3.0 * c.Theta_w + 1.0) * c.Lambda1 + 3.0 * sw2);
      const double Cu = 7.0 * Lu2 * c.L_u / (2.0 * mu_eff) *
                        (c.Lambda1 * (c.Theta_u + 1.0) + su2);
      const double eta_bar = std::min(
          std::min(safe_div(1.0, 4.0 * c.L_w *
                                     std::sqrt(2.0 * c.Lambda0 * (c.Theta_w + 1.0))),
                   safe_div(1.0, 4.0 * L_Phi0)),
          std::min(safe_div(1.0, 2.0 * c.L_w), safe_div(1.0, 2.0 * c.L_u * kappa)));
      const double eta_hat_bar = safe_div(
          std::sqrt(mu_eff),
          2.0 * std::sqrt(14.0 * c.Lambda0 * Lu2 * c.L_u * (c.Theta_u + 1.0)));
      out.eta = std::min(eta_bar, safe_div(epsilon, std::sqrt(32.0 * Cw)));
      out.eta_hat = std::min(eta_hat_bar, safe_div(epsilon, std::sqrt(32.0 * Cu)));
      if (!std::isfinite(out.eta) || !std::isfinite(out.eta_hat))
        throw std::invalid_argument("auto_params_nc: degenerate full constants");
      out.S = std::max<long>(1, nc_full_inner_epochs(mu_eff, out.eta_hat));
      const double num = 16.0 * (2.0 * in.delta_psi +
                                 Lu2 * out.eta * in.u_gap * in.u_gap);
      out.T = std::max<long>(1, static_cast<long>(std::ceil(num / (out.eta * e2))));
      break;
    }
    case NCRegime::kFullS1: {
      const double mult = s1_multiplier;
      const double mu_psi = d.mu_psi;
      const double Cw = 5.0 * Lw2 * (c.Lambda1 * (3.0 * c.Theta_w + 1.0) + 3.0 * sw2);
      const double Cu =
          0.5 * Lu2 * (c.Lambda1_hat * (3.0 * c.Theta_u + 2.0) + 3.0 * su2);
      const double b1 = safe_div(1.0, 60.0 * kappa * kappa * c.L_u);
      const double b2 =
          safe_div(1.0, std::sqrt(10.0 * c.Lambda0 * Lw2 * (3.0 * c.Theta_w + 1.0)));
      const double b3 = safe_div(2.0 * std::sqrt(c.L_u),
                                 kappa * std::sqrt(15.0 * (4.0 * Lu2 + mu_psi * mu_psi)));
      const double b4 = safe_div(
          std::sqrt(c.L_u),
          15.0 * kappa *
              std::sqrt(2.0 * Lu2 * c.L_u * c.Lambda0_hat * (3.0 * c.Theta_u + 2.0) +
                        mu_psi * mu_psi));
      const double b5 = safe_div(1.0, 4.0 * L_Phi0 + c.L_w + c.L_f);
      const double eta_bar = std::min(std::min(b1, b2), std::min(std::min(b3, b4), b5));
      const double k2 = kappa * kappa;
      const double Ceff = Cw + mult * mult * mult * k2 * k2 * k2 * Cu;
      out.eta = std::min(eta_bar, safe_div(epsilon, std::sqrt(16.0 * Ceff)));
      if (!std::isfinite(out.eta) || out.eta <= 0.0)
        throw std::invalid_argument("auto_params_nc: degenerate s1 constants");
      out.eta_hat = nc_s1_eta_hat(kappa, out.eta, mult);
      out.S = 1;
      const double num = 24.0 * in.delta_psi + 8.0 * std::max(in.lagr_gap0, 0.0);
      out.T = std::max<long>(
          1, static_cast<long>(std::ceil(2.0 * num / (out.eta * e2))));
      break;
    }
  }
  return out;
}

inline AutoParamsNC auto_params_nc(const ProblemNC& prob, const DenseVec& w0,
                                   const DenseVec& u0, NCRegime regime,
                                   double epsilon, double s1_multiplier = 15.0) {
  AutoInputsNC in;
  const DenseVec ustar =
      prob.exact_u_star ? prob.exact_u_star(w0) : approx_u_star(prob, w0);
  const double phi0 = prob.exact_Phi0
                          ? prob.exact_Phi0(w0)
                          : full_H(prob, w0, ustar) - prob.h.evaluate(ustar);
  const double psi0 = phi0 + prob.f.evaluate(w0);
  in.delta_psi = std::max(psi0 - prob.constants.Psi0_lower_bound, 0.0);
  in.u_gap = nrm2(sub(u0, ustar));
  in.lagr_gap0 = psi0 - lagrangian(prob, w0, u0);
  return auto_params_nc_raw(prob.constants, prob.h.strong_convexity, regime,
                            epsilon, in, s1_multiplier);
}

// ---------------------------------------------------------------------------
// Inner maximizers.

// Full prox-gradient ascent: u <- prox_{eta_hat h}(u + eta_hat grad_u H(w, u)),
// S steps. Requires eta_hat <= 2/(L_u + mu_H) for the contraction.
inline DenseVec inner_gradient_ascent(const ProblemNC& prob, const DenseVec& w,
                                      const DenseVec& u0, double eta_hat, long S,
                                      long* gradu_evals = nullptr) {
  if (eta_hat <= 0.0 ||
      eta_hat > 2.0 / (prob.constants.L_u + prob.constants.mu_H) * (1.0 + 1e-12))
    throw std::invalid_argument("inner_gradient_ascent: need 0 < eta_hat <= 2/(L_u+mu_H)");
  DenseVec u = u0;
  for (long s = 0; s < S; ++s) {
    const DenseVec gu = full_gradu_H(prob, w, u);
    if (gradu_evals) *gradu_evals += prob.n;
    u = prob.h.prox(axpy(eta_hat, gu, u), eta_hat);
    if (!all_finite(u)) break;
  }
  return u;
}

// Shuffling ascent: S epochs; each epoch draws a fresh permutation from the
// given stream (counter advances per epoch), runs n component-gradient steps
// of size eta_hat/n, and applies prox_{eta_hat h} at the epoch end.
inline DenseVec inner_shuffling_ascent(const ProblemNC& prob, const DenseVec& w,
                                       const DenseVec& u0, double eta_hat, long S,
                                       const Rng& rng, std::uint64_t counter_base,
                                       PermutationMode mode,
                                       long* gradu_evals = nullptr,
                                       const PermutationPair* given = nullptr) {
  if (eta_hat <= 0.0)
    throw std::invalid_argument("inner_shuffling_ascent: eta_hat <= 0");
  DenseVec u = u0;
  for (long s = 0; s < S; ++s) {
    const PermutationPair perm = sample_permutations(
        prob.n, mode, rng.stream("u_pi", counter_base + s),
        rng.stream("u_pi", counter_base + s), given);
    DenseVec ui = u;
    for (int i = 1; i <= prob.n; ++i) {
      const DenseVec gu = prob.eval_gradu_H_i(perm.pi[i - 1], w, ui);
      if (gradu_evals) *gradu_evals += 1;
      axpy_in(eta_hat / prob.n, gu, ui);
      if (!all_finite(ui)) return ui;
    }
    u = prob.h.prox(ui, eta_hat);
  }
  return u;
}

// ---------------------------------------------------------------------------
// Algorithm 2.

inline SolveResultNC solve_nc(const ProblemNC& prob, const DenseVec& w0,
                              const DenseVec& u0, const ConfigNC& cfg_in) {
  if (static_cast<int>(w0.size()) != prob.p ||
      static_cast<int>(u0.size()) != prob.q)
    throw std::invalid_argument("solve_nc: w0/u0 dimension mismatch");
  ConfigNC cfg = cfg_in;
  if (cfg.eta <= 0.0 || cfg.eta_hat <= 0.0 || cfg.S <= 0 || cfg.T <= 0) {
    const AutoParamsNC ap =
        auto_params_nc(prob, w0, u0, cfg.regime, cfg.epsilon, cfg.s1_multiplier);
    if (cfg.eta <= 0.0) cfg.eta = ap.eta;
    if (cfg.eta_hat <= 0.0) cfg.eta_hat = ap.eta_hat;
    if (cfg.S <= 0) cfg.S = ap.S;
    if (cfg.T <= 0) cfg.T = ap.T;
  }
  SolveResultNC res;
  res.eta_used = cfg.eta;
  res.eta_hat_used = cfg.eta_hat;
  res.S_used = cfg.S;
  res.T_planned = cfg.T;
  res.best_norm = std::numeric_limits<double>::infinity();

  const bool semi = cfg.regime == NCRegime::kSemi;
  Rng rng(cfg.seed);
  DenseVec w_tilde = w0;
  DenseVec u_tilde = u0;
  long gradw_evals = 0, gradu_evals = 0;
  const auto t_start = std::chrono::steady_clock::now();

  for (long t = 1; t <= cfg.T; ++t) {
    const DenseVec w_epoch0 = w_tilde;
    // inner maximizer (warm-started at the previous u_tilde)
    if (semi)
      u_tilde = inner_gradient_ascent(prob, w_epoch0, u_tilde, cfg.eta_hat,
                                      cfg.S, &gradu_evals);
    else
      u_tilde = inner_shuffling_ascent(
          prob, w_epoch0, u_tilde, cfg.eta_hat, cfg.S, rng,
          static_cast<std::uint64_t>(t - 1) * static_cast<std::uint64_t>(cfg.S),
          cfg.permutation_mode == PermutationMode::kFixedGiven
              ? PermutationMode::kIdentity
              : cfg.permutation_mode,
          &gradu_evals);
    bool ok = all_finite(u_tilde);

    // outer shuffling descent on w
    DenseVec w = w_epoch0;
    if (ok) {
      const PermutationMode outer_mode =
          cfg.permutation_mode == PermutationMode::kFixedGiven
              ? PermutationMode::kIdentity
              : cfg.permutation_mode;
      const PermutationPair perm = sample_permutations(
          prob.n, outer_mode, rng.stream("pi_hat", t), rng.stream("pi_hat", t));
      for (int i = 1; i <= prob.n; ++i) {
        const DenseVec d = hyper_gradient_nc(prob, perm.pi_hat[i - 1], w, u_tilde);
        ++gradw_evals;
        axpy_in(-cfg.eta / prob.n, d, w);
        if (!all_finite(w)) { ok = false; break; }
      }
    }
    if (ok) w_tilde = prob.f.prox(w, cfg.eta);

    // metrics pass (not counted)
    EpochRecordNC rec;
    rec.t = t;
    rec.gradw_evals = gradw_evals;
    rec.gradu_evals = gradu_evals;
    if (ok) {
      const DenseVec gphi = grad_phi0_nc(prob, w_tilde);
      rec.grad_map_norm_w =
          nrm2(grad_mapping_w(w_tilde, gphi, prob.f, cfg.eta));
      const DenseVec gu = full_gradu_H(prob, w_tilde, u_tilde);
      rec.grad_map_norm_u =
          nrm2(grad_mapping_u(u_tilde, gu, prob.h, cfg.eta_hat));
      rec.u_gap = prob.exact_u_star
                      ? nrm2(sub(u_tilde, prob.exact_u_star(w_epoch0)))
                      : std::numeric_limits<double>::quiet_NaN();
      rec.objective = (cfg.record_objective && prob.exact_Phi0)
                          ? psi0_oracle(prob, w_tilde)
                          : lagrangian(prob, w_tilde, u_tilde);
    } else {
      rec.grad_map_norm_w = rec.grad_map_norm_u = rec.u_gap = rec.objective =
          std::numeric_limits<double>::quiet_NaN();
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
      res.u_final = u_tilde;
      return res;
    }
    if (rec.grad_map_norm_w < res.best_norm) {
      res.best_norm = rec.grad_map_norm_w;
      res.best_epoch = t;
      res.w_best = w_tilde;
    }
    if (cfg.target_grad_norm > 0.0 &&
        rec.grad_map_norm_w <= cfg.target_grad_norm) {
      if (!keep) res.trace.push_back(rec);
      break;
    }
  }
  res.w_final = w_tilde;
  res.u_final = u_tilde;
  if (res.w_best.empty()) {
    res.w_best = w_tilde;
    res.best_epoch = cfg.T;
  }
  return res;
}

}  // namespace minimax
