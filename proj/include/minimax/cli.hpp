// Experiment harness: flat key=value configs, problem construction, trace CSV
// emission, the learning-rate sweep, constant validation, and summaries.
#pragma once

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "minimax/data.hpp"
#include "minimax/metrics.hpp"
#include "minimax/problem.hpp"
#include "minimax/solver_nc.hpp"
#include "minimax/solver_nl.hpp"

namespace minimax {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kTraceHeader =
    "epoch,seed,algorithm,objective,grad_map_norm,gamma,f_evals,jac_evals,"
    "gradw_evals,gradu_evals,wall_ms";

// Built-in learning-rate grid for `sweep`.
inline const std::vector<double>& sweep_eta_grid() {
  static const std::vector<double> g = {100.0, 50.0, 10.0,  5.0,   1.0,  0.5,
                                        0.1,   0.05, 0.01,  0.001, 0.0001};
  return g;
}

// ---------------------------------------------------------------------------
// key = value config files ('#' comments, blank lines allowed).

struct KVConfig {
  std::map<std::string, std::string> kv;
};

namespace detail_cli {

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace detail_cli

inline KVConfig parse_kv_config(std::istream& in, std::vector<std::string>& errors) {
  KVConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail_cli::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back("line " + std::to_string(lineno) + ": expected key = value");
      continue;
    }
    const std::string key = detail_cli::trim(line.substr(0, eq));
    const std::string val = detail_cli::trim(line.substr(eq + 1));
    if (key.empty()) {
      errors.push_back("line " + std::to_string(lineno) + ": empty key");
      continue;
    }
    if (cfg.kv.count(key)) {
      errors.push_back("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
      continue;
    }
    cfg.kv[key] = val;
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Experiment description.

struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  std::string problem;    // model-selection | quadratic
  std::string algorithm;  // sgm-opt1 sgm-opt2 sgd-baseline sgm-nc-semi
                          // sgm-nc-full sgm-nc-full-s1
  // model-selection problem
  std::string data_path;  // empty -> synthetic
  int synth_n = 500, synth_p = 20;
  std::uint64_t synth_seed = 1;
  double synth_noise = 0.0;
  int k_b = 0;
  double lambda = 1e-4, l1_radius = 1.0, region_radius = 10.0;
  // quadratic problem
  int dim_p = 5, dim_q = 5, n_components = 8;
  std::uint64_t prob_seed = 7;
  double mu_H = 1.0, min_curvature = 0.3;
  bool l1_ball_h = false;
  // run control
  std::vector<std::uint64_t> seeds = {1};
  long T = -1;  // -1 auto; 0 produces a header-only "no-run" trace
  double eta = 0.0, eta_hat = 0.0;
  long S = 0;
  double epsilon = 0.1;
  double gamma = 0.5;
  std::string gamma_schedule = "decreasing";  // constant | decreasing
  std::string permutation_mode = "random-independent";
  double s1_multiplier = 15.0;
  double target_grad_norm = 0.0;
  int trace_stride = 1;
  bool record_objective = true;
  double sgd_beta = 0.9;
  std::string nc_full_regime = "muH";  // muH | muh  (sgm-nc-full only)
  std::string output = "trace.csv";

  bool is_nl() const {
    return algorithm == "sgm-opt1" || algorithm == "sgm-opt2" ||
           algorithm == "sgd-baseline";
  }
};

namespace detail_cli {

inline bool parse_bool(const std::string& v, bool& out) {
  if (v == "true" || v == "1" || v == "yes") { out = true; return true; }
  if (v == "false" || v == "0" || v == "no") { out = false; return true; }
  return false;
}

template <typename T>
bool parse_num(const std::string& v, T& out) {
  std::istringstream ss(v);
  ss >> out;
  return static_cast<bool>(ss) && ss.eof();
}

inline bool parse_seed_list(const std::string& v, std::vector<std::uint64_t>& out) {
  out.clear();
  std::istringstream ss(v);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    std::uint64_t s;
    if (tok.empty() || !parse_num(tok, s)) return false;
    out.push_back(s);
  }
  return !out.empty();
}

}  // namespace detail_cli

// Collects every error instead of stopping at the first one.
inline std::vector<std::string> build_experiment_config(const KVConfig& raw,
                                                        ExperimentConfig& cfg) {
  using namespace detail_cli;
  std::vector<std::string> errors;
  std::map<std::string, std::string> kv = raw.kv;
  auto take = [&](const char* key) -> const std::string* {
    auto it = kv.find(key);
    if (it == kv.end()) return nullptr;
    static thread_local std::string held;
    held = it->second;
    kv.erase(it);
    return &held;
  };
  auto bad = [&](const char* key, const std::string& v) {
    errors.push_back(std::string("invalid value for '") + key + "': " + v);
  };
  auto num = [&](const char* key, auto& field) {
    if (const std::string* v = take(key))
      if (!parse_num(*v, field)) bad(key, *v);
  };
  auto boolean = [&](const char* key, bool& field) {
    if (const std::string* v = take(key))
      if (!parse_bool(*v, field)) bad(key, *v);
  };
  auto str = [&](const char* key, std::string& field) {
    if (const std::string* v = take(key)) field = *v;
  };

  num("schema_version", cfg.schema_version);
  if (cfg.schema_version != kSchemaVersion)
    errors.push_back("unsupported schema_version " +
                     std::to_string(cfg.schema_version) + " (expected " +
                     std::to_string(kSchemaVersion) + ")");
  str("problem", cfg.problem);
  str("algorithm", cfg.algorithm);
  str("data_path", cfg.data_path);
  num("synth_n", cfg.synth_n);
  num("synth_p", cfg.synth_p);
  num("synth_seed", cfg.synth_seed);
  num("synth_noise", cfg.synth_noise);
  num("k_b", cfg.k_b);
  num("lambda", cfg.lambda);
  num("l1_radius", cfg.l1_radius);
  num("region_radius", cfg.region_radius);
  num("dim_p", cfg.dim_p);
  num("dim_q", cfg.dim_q);
  num("n_components", cfg.n_components);
  num("prob_seed", cfg.prob_seed);
  num("mu_H", cfg.mu_H);
  num("min_curvature", cfg.min_curvature);
  boolean("l1_ball_h", cfg.l1_ball_h);
  if (const std::string* v = take("seeds")) {
    if (!parse_seed_list(*v, cfg.seeds)) bad("seeds", *v);
  } else if (const std::string* v2 = take("seed")) {
    std::uint64_t s;
    if (parse_num(*v2, s)) cfg.seeds = {s}; else bad("seed", *v2);
  }
  num("epochs", cfg.T);
  num("eta", cfg.eta);
  num("eta_hat", cfg.eta_hat);
  num("S", cfg.S);
  num("epsilon", cfg.epsilon);
  num("gamma", cfg.gamma);
  str("gamma_schedule", cfg.gamma_schedule);
  str("permutation_mode", cfg.permutation_mode);
  num("s1_multiplier", cfg.s1_multiplier);
  num("target_grad_norm", cfg.target_grad_norm);
  num("trace_stride", cfg.trace_stride);
  boolean("record_objective", cfg.record_objective);
  num("sgd_beta", cfg.sgd_beta);
  str("nc_full_regime", cfg.nc_full_regime);
  str("output", cfg.output);

  for (const auto& [k, v] : kv)
    errors.push_back("unknown key '" + k + "'");

  static const std::vector<std::string> algos = {
      "sgm-opt1",    "sgm-opt2",    "sgd-baseline",
      "sgm-nc-semi", "sgm-nc-full", "sgm-nc-full-s1"};
  if (std::find(algos.begin(), algos.end(), cfg.algorithm) == algos.end())
    errors.push_back("unknown algorithm '" + cfg.algorithm + "'");
  if (cfg.problem != "model-selection" && cfg.problem != "quadratic")
    errors.push_back("unknown problem '" + cfg.problem + "'");
  else if (cfg.is_nl() && cfg.problem != "model-selection")
    errors.push_back("algorithm '" + cfg.algorithm +
                     "' requires problem = model-selection");
  else if (!cfg.is_nl() && cfg.problem != "quadratic")
    errors.push_back("algorithm '" + cfg.algorithm + "' requires problem = quadratic");
  if (cfg.gamma_schedule != "constant" && cfg.gamma_schedule != "decreasing")
    errors.push_back("gamma_schedule must be constant or decreasing");
  try {
    permutation_mode_from_string(cfg.permutation_mode);
  } catch (const std::exception& e) {
    errors.push_back(e.what());
  }
  if (cfg.permutation_mode == "fixed-given")
    errors.push_back("fixed-given permutations are not available from config files");
  if (cfg.nc_full_regime != "muH" && cfg.nc_full_regime != "muh")
    errors.push_back("nc_full_regime must be muH or muh");
  if (cfg.epsilon <= 0.0) errors.push_back("epsilon must be > 0");
  if (cfg.trace_stride < 1) errors.push_back("trace_stride must be >= 1");
  if (cfg.lambda <= 0.0) errors.push_back("lambda must be > 0");
  if (cfg.output.empty()) errors.push_back("output must be non-empty");
  return errors;
}

// ---------------------------------------------------------------------------
// Problem construction.

struct BuiltProblem {
  bool is_nl = false;
  ProblemNL nl;
  SmoothingSpec smoothing;  // NL only
  ProblemNC nc;
};

inline BuiltProblem build_problem(const ExperimentConfig& cfg) {
  BuiltProblem bp;
  if (cfg.is_nl()) {
    bp.is_nl = true;
    SparseDataset ds;
    if (!cfg.data_path.empty()) {
      std::ifstream in(cfg.data_path);
      if (!in) throw std::runtime_error("cannot open data file: " + cfg.data_path);
      ds = parse_libsvm(in);
    } else {
      ds = generate_synthetic(cfg.synth_n, cfg.synth_p, cfg.synth_seed,
                              cfg.synth_noise);
    }
    ModelSelectionOptions opts;
    opts.lambda = cfg.lambda;
    opts.k_b = cfg.k_b;
    opts.region_radius = cfg.region_radius;
    opts.l1_radius = cfg.l1_radius;
    bp.nl = build_model_selection(ds, opts);
    bp.smoothing = l1_ball_smoothing(bp.nl.m, cfg.gamma, cfg.l1_radius);
  } else {
    QuadraticOptions opts;
    opts.mu_H = cfg.mu_H;
    opts.min_curvature = cfg.min_curvature;
    opts.l1_ball_h = cfg.l1_ball_h;
    opts.l1_radius = cfg.l1_radius;
    bp.nc = build_quadratic_minimax(cfg.dim_p, cfg.dim_q, cfg.n_components,
                                    cfg.prob_seed, opts);
  }
  return bp;
}

// ---------------------------------------------------------------------------
// Trace CSV.

struct TraceRow {
  long epoch = 0;
  std::uint64_t seed = 0;
  std::string algorithm;
  double objective = 0.0;
  double grad_map_norm = 0.0;
  double gamma = 0.0;
  long f_evals = 0, jac_evals = 0, gradw_evals = 0, gradu_evals = 0;
  double wall_ms = 0.0;
};

inline void write_trace_rows(std::ostream& out, const std::vector<TraceRow>& rows) {
  char buf[512];
  for (const TraceRow& r : rows) {
    std::snprintf(buf, sizeof buf,
                  "%ld,%llu,%s,%.17g,%.17g,%.17g,%ld,%ld,%ld,%ld,%.17g\n",
                  r.epoch, static_cast<unsigned long long>(r.seed),
                  r.algorithm.c_str(), r.objective, r.grad_map_norm, r.gamma,
                  r.f_evals, r.jac_evals, r.gradw_evals, r.gradu_evals,
                  r.wall_ms);
    out << buf;
  }
}

inline void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& rows,
                            const std::string& status = "ok") {
  out << kTraceHeader << '\n';
  write_trace_rows(out, rows);
  if (status != "ok") out << "# status=" << status << '\n';
}

inline std::string resolve_output_path(const std::string& name) {
  const char* dir = std::getenv("MINIMAX_OUTPUT_DIR");
  if (!dir || !*dir) return name;
  std::string d(dir);
  if (!d.empty() && d.back() != '/') d += '/';
  return d + name;
}

// ---------------------------------------------------------------------------
// Running experiments.

struct RunOutcome {
  std::vector<TraceRow> rows;  // sorted by (seed, epoch)
  bool aborted = false;
  double min_grad_norm = std::numeric_limits<double>::infinity();
  std::vector<double> final_objectives;  // one per seed
};

namespace detail_cli {

inline ConfigNL make_nl_config(const ExperimentConfig& cfg, std::uint64_t seed) {
  ConfigNL c;
  c.eta = cfg.eta;
  c.T = cfg.T < 0 ? 0 : cfg.T;  // solver treats T <= 0 as auto
  c.epsilon = cfg.epsilon;
  c.gamma_schedule = cfg.gamma_schedule == "constant" ? GammaSchedule::kConstant
                                                      : GammaSchedule::kDecreasing;
  c.gamma = cfg.gamma;
  c.option = cfg.algorithm == "sgm-opt2" ? 2 : 1;
  c.permutation_mode = permutation_mode_from_string(cfg.permutation_mode);
  c.seed = seed;
  c.record_objective = cfg.record_objective;
  c.target_grad_norm = cfg.target_grad_norm;
  c.trace_stride = cfg.trace_stride;
  c.sgd_tracking_weight = cfg.sgd_beta;
  return c;
}

inline ConfigNC make_nc_config(const ExperimentConfig& cfg, std::uint64_t seed) {
  ConfigNC c;
  if (cfg.algorithm == "sgm-nc-semi")
    c.regime = NCRegime::kSemi;
  else if (cfg.algorithm == "sgm-nc-full-s1")
    c.regime = NCRegime::kFullS1;
  else
    c.regime = cfg.nc_full_regime == "muh" ? NCRegime::kFullMuh : NCRegime::kFullMuH;
  c.eta = cfg.eta;
  c.eta_hat = cfg.eta_hat;
  c.S = cfg.S;
  c.T = cfg.T < 0 ? 0 : cfg.T;
  c.epsilon = cfg.epsilon;
  c.permutation_mode = permutation_mode_from_string(cfg.permutation_mode);
  c.seed = seed;
  c.s1_multiplier = cfg.s1_multiplier;
  c.record_objective = cfg.record_objective;
  c.target_grad_norm = cfg.target_grad_norm;
  c.trace_stride = cfg.trace_stride;
  return c;
}

}  // namespace detail_cli

inline RunOutcome run_single_seed(const ExperimentConfig& cfg,
                                  const BuiltProblem& bp, std::uint64_t seed) {
  RunOutcome out;
  if (cfg.T == 0) return out;  // explicit no-run
  {
    if (bp.is_nl) {
      const DenseVec w0(bp.nl.p, 0.0);
      const ConfigNL c = detail_cli::make_nl_config(cfg, seed);
      const SolveResultNL res =
          cfg.algorithm == "sgd-baseline"
              ? compositional_sgd_baseline(bp.nl, w0, c, bp.smoothing)
              : solve_nl(bp.nl, w0, c, bp.smoothing);
      for (const EpochRecordNL& e : res.trace) {
        TraceRow r;
        r.epoch = e.t;
        r.seed = seed;
        r.algorithm = cfg.algorithm;
        r.objective = e.psi_gamma;
        r.grad_map_norm = e.grad_map_norm;
        r.gamma = e.gamma;
        r.f_evals = e.f_evals;
        r.jac_evals = e.jac_evals;
        r.wall_ms = e.wall_ms;
        out.rows.push_back(std::move(r));
      }
      if (res.status == SolveStatus::kAborted) out.aborted = true;
      if (!res.trace.empty()) {
        out.final_objectives.push_back(res.trace.back().psi_gamma);
        out.min_grad_norm = std::min(out.min_grad_norm, res.best_norm);
      }
    } else {
      const DenseVec w0(bp.nc.p, 0.0), u0(bp.nc.q, 0.0);
      const ConfigNC c = detail_cli::make_nc_config(cfg, seed);
      const SolveResultNC res = solve_nc(bp.nc, w0, u0, c);
      for (const EpochRecordNC& e : res.trace) {
        TraceRow r;
        r.epoch = e.t;
        r.seed = seed;
        r.algorithm = cfg.algorithm;
        r.objective = e.objective;
        r.grad_map_norm = e.grad_map_norm_w;
        r.gamma = 0.0;
        r.gradw_evals = e.gradw_evals;
        r.gradu_evals = e.gradu_evals;
        r.wall_ms = e.wall_ms;
        out.rows.push_back(std::move(r));
      }
      if (res.status == SolveStatus::kAborted) out.aborted = true;
      if (!res.trace.empty()) {
        out.final_objectives.push_back(res.trace.back().objective);
        out.min_grad_norm = std::min(out.min_grad_norm, res.best_norm);
      }
    }
  }
  return out;
}

inline RunOutcome run_experiment(const ExperimentConfig& cfg,
                                 const BuiltProblem& bp) {
  RunOutcome out;
  for (std::uint64_t seed : cfg.seeds) {
    RunOutcome one = run_single_seed(cfg, bp, seed);
    out.rows.insert(out.rows.end(), one.rows.begin(), one.rows.end());
    out.aborted = out.aborted || one.aborted;
    out.min_grad_norm = std::min(out.min_grad_norm, one.min_grad_norm);
    out.final_objectives.insert(out.final_objectives.end(),
                                one.final_objectives.begin(),
                                one.final_objectives.end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Constant validation: empirical worst-case ratios over random region points.
// Ratios > 1 mean the declared constant is violated; reported as warnings,
// never fatal. Deterministic for a given seed.

inline std::vector<std::string> validate_constants(const BuiltProblem& bp,
                                                   std::uint64_t seed,
                                                   double region_radius,
                                                   std::ostream& log) {
  std::vector<std::string> warnings;
  Rng rng(seed);
  RngStream pts = rng.stream("validate");
  const int kPoints = 100;
  char buf[256];
  auto report = [&](const char* name, double ratio) {
    std::snprintf(buf, sizeof buf, "  %-10s worst empirical/declared = %.6g",
                  name, ratio);
    log << buf << '\n';
    if (ratio > 1.0 + 1e-6)
      warnings.push_back(std::string("declared constant ") + name +
                         " violated (ratio " + std::to_string(ratio) + ")");
  };
  auto rand_vec = [&](int dim, double radius) {
    DenseVec v(dim);
    for (double& x : v) x = pts.normal();
    const double nn = nrm2(v);
    const double target = radius * pts.uniform();
    return nn > 0 ? scaled(v, target / nn) : v;
  };

  if (bp.is_nl) {
    const ProblemNL& prob = bp.nl;
    double rMF = 0.0, rLF = 0.0, rSJ = 0.0;
    for (int k = 0; k < kPoints; ++k) {
      const DenseVec w1 = rand_vec(prob.p, region_radius);
      const DenseVec w2 = rand_vec(prob.p, region_radius);
      DenseVec y = rand_vec(prob.m, 1.0);
      const double yn = nrm2(y);
      if (yn == 0.0) continue;
      y = scaled(y, 1.0 / yn);
      DenseVec mean(prob.p, 0.0);
      std::vector<DenseVec> per(prob.n);
      for (int i = 1; i <= prob.n; ++i) {
        per[i - 1] = prob.eval_Jt_vec_i(i, w1, y);
        axpy_in(1.0, per[i - 1], mean);
        rMF = std::max(rMF, nrm2(per[i - 1]) / prob.constants.M_F);
        const DenseVec g2 = prob.eval_Jt_vec_i(i, w2, y);
        const double dw = nrm2(sub(w1, w2));
        if (dw > 1e-12)
          rLF = std::max(rLF, nrm2(sub(per[i - 1], g2)) / (dw * prob.constants.L_F));
      }
      mean = scaled(mean, 1.0 / prob.n);
      double var = 0.0;
      for (const DenseVec& g : per) var += nrm2_sq(sub(g, mean));
      var /= prob.n;
      if (prob.constants.sigma_J > 0)
        rSJ = std::max(rSJ, std::sqrt(var) / prob.constants.sigma_J);
    }
    report("M_F", rMF);
    report("L_F", rLF);
    report("sigma_J", rSJ);
  } else {
    const ProblemNC& prob = bp.nc;
    const ConstantsNC& c = prob.constants;
    double rLw = 0.0, rLu = 0.0, rMu = 0.0, rVarW = 0.0, rVarU = 0.0;
    for (int k = 0; k < kPoints; ++k) {
      const DenseVec w1 = rand_vec(prob.p, region_radius);
      const DenseVec w2 = rand_vec(prob.p, region_radius);
      const DenseVec u1 = rand_vec(prob.q, region_radius);
      const DenseVec u2 = rand_vec(prob.q, region_radius);
      const double dwu = std::sqrt(nrm2_sq(sub(w1, w2)) + nrm2_sq(sub(u1, u2)));
      for (int i = 1; i <= prob.n; ++i) {
        if (dwu > 1e-12) {
          const DenseVec gw1 = prob.eval_gradw_H_i(i, w1, u1);
          const DenseVec gw2 = prob.eval_gradw_H_i(i, w2, u2);
          rLw = std::max(rLw, nrm2(sub(gw1, gw2)) / (dwu * c.L_w));
          const DenseVec gu1 = prob.eval_gradu_H_i(i, w1, u1);
          const DenseVec gu2 = prob.eval_gradu_H_i(i, w2, u2);
          rLu = std::max(rLu, nrm2(sub(gu1, gu2)) / (dwu * c.L_u));
        }
      }
      // strong concavity in u: <gu(u1) - gu(u2), u1 - u2> <= -mu_H ||u1-u2||^2
      const double du2 = nrm2_sq(sub(u1, u2));
      if (du2 > 1e-12 && c.mu_H > 0) {
        const DenseVec g1 = full_gradu_H(prob, w1, u1);
        const DenseVec g2 = full_gradu_H(prob, w1, u2);
        const double inner = dot(sub(g1, g2), sub(u1, u2));
        rMu = std::max(rMu, c.mu_H / std::max(-inner / du2, 1e-300));
      }
      // component-variance bounds
      const DenseVec gw = full_gradw_H(prob, w1, u1);
      const DenseVec gu = full_gradu_H(prob, w1, u1);
      double vw = 0.0, vu = 0.0;
      for (int i = 1; i <= prob.n; ++i) {
        vw += nrm2_sq(sub(prob.eval_gradw_H_i(i, w1, u1), gw));
        vu += nrm2_sq(sub(prob.eval_gradu_H_i(i, w1, u1), gu));
      }
      vw /= prob.n;
      vu /= prob.n;
      const double bw = c.Theta_w * nrm2_sq(gw) + c.sigma_w * c.sigma_w;
      const double bu = c.Theta_u * nrm2_sq(gu) + c.sigma_u * c.sigma_u;
      if (bw > 0) rVarW = std::max(rVarW, vw / bw);
      if (bu > 0) rVarU = std::max(rVarU, vu / bu);
    }
    report("L_w", rLw);
    report("L_u", rLu);
    report("mu_H", rMu);
    report("var_w", rVarW);
    report("var_u", rVarU);
  }
  return warnings;
}

// ---------------------------------------------------------------------------
// Summaries: per-algorithm median of per-seed final objective + overall min
// gradient-mapping norm.

struct TraceSummary {
  std::string algorithm;
  double median_final_objective = 0.0;
  double min_grad_norm = std::numeric_limits<double>::infinity();
  int seeds = 0;
};

inline double median_of(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

inline std::vector<TraceSummary> summarize_rows(const std::vector<TraceRow>& rows) {
  // final objective = last row per (algorithm, seed)
  std::map<std::string, std::map<std::uint64_t, double>> finals;
  std::map<std::string, double> min_norm;
  for (const TraceRow& r : rows) {
    finals[r.algorithm][r.seed] = r.objective;  // rows are epoch-ordered per seed
    auto it = min_norm.find(r.algorithm);
    const double g = r.grad_map_norm;
    if (it == min_norm.end())
      min_norm[r.algorithm] = g;
    else if (g < it->second)
      it->second = g;
  }
  std::vector<TraceSummary> out;
  for (const auto& [algo, per_seed] : finals) {
    TraceSummary s;
    s.algorithm = algo;
    std::vector<double> fo;
    for (const auto& [seed, obj] : per_seed) fo.push_back(obj);
    s.median_final_objective = median_of(fo);
    s.min_grad_norm = min_norm[algo];
    s.seeds = static_cast<int>(per_seed.size());
    out.push_back(std::move(s));
  }
  return out;
}

inline std::vector<TraceRow> parse_trace_csv(std::istream& in,
                                             std::vector<std::string>& errors) {
  std::vector<TraceRow> rows;
  std::string line;
  if (!std::getline(in, line)) {
    errors.push_back("empty trace file");
    return rows;
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTraceHeader) {
    errors.push_back("unexpected trace header: " + line);
    return rows;
  }
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string f[11];
    bool ok = true;
    for (int i = 0; i < 11; ++i)
      if (!std::getline(ls, f[i], ',')) { ok = false; break; }
    if (!ok) {
      errors.push_back("line " + std::to_string(lineno) + ": expected 11 fields");
      continue;
    }
    TraceRow r;
    try {
      r.epoch = std::stol(f[0]);
      r.seed = std::stoull(f[1]);
      r.algorithm = f[2];
      r.objective = std::stod(f[3]);
      r.grad_map_norm = std::stod(f[4]);
      r.gamma = std::stod(f[5]);
      r.f_evals = std::stol(f[6]);
      r.jac_evals = std::stol(f[7]);
      r.gradw_evals = std::stol(f[8]);
      r.gradu_evals = std::stol(f[9]);
      r.wall_ms = std::stod(f[10]);
    } catch (const std::exception&) {
      errors.push_back("line " + std::to_string(lineno) + ": unparseable field");
      continue;
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Verbs. Exit codes: 0 ok, 2 config error, 3 numeric abort.

inline int cli_run(const std::string& config_path, std::ostream& log) {
  std::ifstream in(config_path);
  if (!in) {
    log << "error: cannot open config: " << config_path << '\n';
    return 2;
  }
  std::vector<std::string> errors;
  const KVConfig raw = parse_kv_config(in, errors);
  ExperimentConfig cfg;
  for (const std::string& e : build_experiment_config(raw, cfg))
    errors.push_back(e);
  if (!errors.empty()) {
    for (const std::string& e : errors) log << "config error: " << e << '\n';
    return 2;
  }
  BuiltProblem bp;
  try {
    bp = build_problem(cfg);
  } catch (const std::exception& e) {
    log << "config error: " << e.what() << '\n';
    return 2;
  }
  const std::string path = resolve_output_path(cfg.output);
  std::ofstream os(path);
  if (!os) {
    log << "error: cannot write " << path << '\n';
    return 2;
  }
  os << kTraceHeader << '\n';
  os.flush();
  bool aborted = false;
  std::size_t total_rows = 0;
  for (std::uint64_t seed : cfg.seeds) {  // per-seed rows, flushed as produced
    const RunOutcome one = run_single_seed(cfg, bp, seed);
    write_trace_rows(os, one.rows);
    os.flush();
    total_rows += one.rows.size();
    aborted = aborted || one.aborted;
  }
  if (aborted) os << "# status=aborted\n";
  log << "wrote " << path << " (" << total_rows << " rows)\n";
  if (cfg.T == 0) log << "summary: no-run (epochs = 0)\n";
  if (aborted) {
    log << "numeric abort: iterates became non-finite; trace truncated\n";
    return 3;
  }
  return 0;
}

inline int cli_sweep(const std::string& config_path, std::ostream& log) {
  std::ifstream in(config_path);
  if (!in) {
    log << "error: cannot open config: " << config_path << '\n';
    return 2;
  }
  std::vector<std::string> errors;
  const KVConfig raw = parse_kv_config(in, errors);
  ExperimentConfig cfg;
  for (const std::string& e : build_experiment_config(raw, cfg))
    errors.push_back(e);
  if (!errors.empty()) {
    for (const std::string& e : errors) log << "config error: " << e << '\n';
    return 2;
  }
  BuiltProblem bp;
  try {
    bp = build_problem(cfg);
  } catch (const std::exception& e) {
    log << "config error: " << e.what() << '\n';
    return 2;
  }
  // every grid point is reported; nothing is selected automatically
  char buf[256];
  for (double eta : sweep_eta_grid()) {
    ExperimentConfig c = cfg;
    c.eta = eta;
    if (c.T < 0) c.T = 50;  // a sweep needs a bounded budget per point
    const RunOutcome out = run_experiment(c, bp);
    std::snprintf(buf, sizeof buf, "%g", eta);
    const std::string tag = buf;
    const std::string path = resolve_output_path("sweep_eta" + tag + ".csv");
    std::ofstream os(path);
    if (os) write_trace_csv(os, out.rows, out.aborted ? "aborted" : "ok");
    std::snprintf(buf, sizeof buf,
                  "eta=%-8g median_final_objective=%-14.6g min_grad_map_norm=%-12.6g%s",
                  eta, median_of(out.final_objectives), out.min_grad_norm,
                  out.aborted ? " [aborted]" : "");
    log << buf << '\n';
  }
  return 0;
}

inline int cli_validate(const std::string& config_path, std::ostream& log) {
  std::ifstream in(config_path);
  if (!in) {
    log << "error: cannot open config: " << config_path << '\n';
    return 2;
  }
  std::vector<std::string> errors;
  const KVConfig raw = parse_kv_config(in, errors);
  ExperimentConfig cfg;
  for (const std::string& e : build_experiment_config(raw, cfg))
    errors.push_back(e);
  if (!errors.empty()) {
    for (const std::string& e : errors) log << "config error: " << e << '\n';
    return 2;
  }
  BuiltProblem bp;
  try {
    bp = build_problem(cfg);
  } catch (const std::exception& e) {
    log << "config error: " << e.what() << '\n';
    return 2;
  }
  log << "config ok: problem=" << cfg.problem << " algorithm=" << cfg.algorithm
      << '\n';
  const double radius = cfg.is_nl() ? cfg.region_radius : 3.0;
  const auto warnings =
      validate_constants(bp, cfg.seeds.front(), radius, log);
  for (const std::string& w : warnings) log << "warning: " << w << '\n';
  if (warnings.empty()) log << "declared constants hold on sampled region\n";
  return 0;
}

inline int cli_summarize(const std::vector<std::string>& trace_paths,
                         std::ostream& log) {
  if (trace_paths.empty()) {
    log << "error: summarize needs at least one trace file\n";
    return 2;
  }
  std::vector<TraceRow> rows;
  for (const std::string& path : trace_paths) {
    std::ifstream in(path);
    if (!in) {
      log << "error: cannot open trace: " << path << '\n';
      return 2;
    }
    std::vector<std::string> errors;
    std::vector<TraceRow> r = parse_trace_csv(in, errors);
    if (!errors.empty()) {
      for (const std::string& e : errors) log << "error: " << path << ": " << e << '\n';
      return 2;
    }
    rows.insert(rows.end(), r.begin(), r.end());
  }
  char buf[256];
  for (const TraceSummary& s : summarize_rows(rows)) {
    std::snprintf(buf, sizeof buf,
                  "algorithm=%-16s seeds=%-3d median_final_objective=%-14.6g "
                  "min_grad_map_norm=%.6g",
                  s.algorithm.c_str(), s.seeds, s.median_final_objective,
                  s.min_grad_norm);
    log << buf << '\n';
  }
  return 0;
}

}  // namespace minimax
