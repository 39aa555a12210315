#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "minimax/solver_nc.hpp"

using namespace minimax;

namespace {

DenseVec random_vec(RngStream& s, int dim, double scale = 1.0) {
  DenseVec v(dim);
  for (double& x : v) x = scale * s.normal();
  return v;
}

// Upper bound on ||u_S - u*||^2 after S shuffling-ascent epochs: a geometric
// contraction of the warm-start error plus an O(eta_hat^3) shuffling term.
double shuffling_ascent_bound(const ProblemNC& prob, double eta_hat, long S,
                              double init_sq, double grad_phi0_sq) {
  const ConstantsNC& c = prob.constants;
  const double mu_h = prob.h.strong_convexity;
  const int n = prob.n;
  const double contr = 1.0 / (1.0 + 2.0 * mu_h * eta_hat);
  const double step = 1.0 - c.mu_H * eta_hat / n;
  double inner = 0.0;
  for (int j = 0; j < n; ++j) inner += contr * std::pow(step, j);
  double outer = 0.0;
  for (long s = 0; s < S; ++s)
    outer += std::pow(contr, static_cast<double>(s)) *
             std::pow(step, static_cast<double>(n) * s);
  const double C_S = inner * outer;
  const double geo =
      std::pow(contr, static_cast<double>(S)) *
      std::pow(step, static_cast<double>(n) * S) * init_sq;
  const double noise = (2.0 * c.L_u / n) * C_S * eta_hat * eta_hat * eta_hat *
                       ((c.Theta_u + 1.0) * grad_phi0_sq +
                        c.sigma_u * c.sigma_u);
  return geo + noise;
}

}  // namespace

TEST_CASE("parameter helpers reproduce hand-computed values") {
  CHECK(nc_full_inner_epochs(1.0, 0.1) == 12);  // floor(ln 3.5 / 0.1)
  CHECK_THROWS(nc_full_inner_epochs(0.0, 0.1));
  CHECK_THROWS(nc_full_inner_epochs(1.0, 0.0));
  CHECK(nc_s1_eta_hat(2.0, 0.001) == doctest::Approx(0.06).epsilon(1e-15));
  CHECK(nc_s1_eta_hat(2.0, 0.001, 10.0) == doctest::Approx(0.04).epsilon(1e-15));
}

TEST_CASE("auto parameters: every regime yields usable values on the benchmark") {
  const ProblemNC prob = build_quadratic_minimax(4, 4, 6, 3);
  const DenseVec w0(prob.p, 0.5), u0(prob.q, 0.0);
  for (NCRegime reg : {NCRegime::kSemi, NCRegime::kFullMuH, NCRegime::kFullS1}) {
    const AutoParamsNC ap = auto_params_nc(prob, w0, u0, reg, 0.05);
    CHECK(ap.eta > 0.0);
    CHECK(ap.eta_hat > 0.0);
    CHECK(ap.S >= 1);
    CHECK(ap.T >= 1);
    if (reg == NCRegime::kFullS1) CHECK(ap.S == 1);
  }
  // the mu_h-based regime needs a strongly convex h, absent on the benchmark
  CHECK_THROWS(auto_params_nc(prob, w0, u0, NCRegime::kFullMuh, 0.05));
  CHECK_THROWS(auto_params_nc_raw(prob.constants, 0.0, NCRegime::kSemi, 0.0,
                                  AutoInputsNC{}));
}

TEST_CASE("inner gradient ascent: preconditions, S = 0, and fixed point") {
  const ProblemNC prob = build_quadratic_minimax(3, 3, 4, 5);
  const double lim = 2.0 / (prob.constants.L_u + prob.constants.mu_H);
  const DenseVec w(prob.p, 0.3), u0(prob.q, 0.7);
  CHECK_THROWS(inner_gradient_ascent(prob, w, u0, 0.0, 3));
  CHECK_THROWS(inner_gradient_ascent(prob, w, u0, 2.0 * lim, 3));
  CHECK(inner_gradient_ascent(prob, w, u0, lim / 2.0, 0) == u0);
  const DenseVec us = prob.exact_u_star(w);
  const DenseVec after = inner_gradient_ascent(prob, w, us, lim / 2.0, 5);
  CHECK(nrm2(sub(after, us)) < 1e-12);
}

TEST_CASE("inner gradient ascent contracts at the co-coercivity rate") {
  const ProblemNC prob = build_quadratic_minimax(3, 4, 5, 7);
  const ConstantsNC& c = prob.constants;
  const double eta_hat = 1.0 / (c.L_u + c.mu_H);
  const double mu_h = prob.h.strong_convexity;
  const double rho = (1.0 - 2.0 * c.L_u * c.mu_H * eta_hat / (c.L_u + c.mu_H)) /
                     (1.0 + 2.0 * mu_h * eta_hat);
  for (int seed = 0; seed < 20; ++seed) {
    RngStream s = Rng(100 + seed).stream("c1");
    const DenseVec w = random_vec(s, prob.p, 1.0);
    const DenseVec us = prob.exact_u_star(w);
    DenseVec u = random_vec(s, prob.q, 2.0);
    for (int step = 0; step < 10; ++step) {
      const double before = nrm2_sq(sub(u, us));
      u = inner_gradient_ascent(prob, w, u, eta_hat, 1);
      CHECK(rho * before - nrm2_sq(sub(u, us)) >= -1e-10);
    }
  }
}

TEST_CASE("shuffling ascent: n = 1 equals full ascent; tiny step is a no-op") {
  const ProblemNC prob = build_quadratic_minimax(3, 3, 1, 9);
  REQUIRE(prob.n == 1);
  const double eta_hat = 0.5 / (prob.constants.L_u + prob.constants.mu_H);
  const DenseVec w(prob.p, 0.2), u0(prob.q, 0.4);
  Rng rng(0);
  const DenseVec a = inner_shuffling_ascent(prob, w, u0, eta_hat, 6, rng, 0,
                                            PermutationMode::kIdentity);
  const DenseVec b = inner_gradient_ascent(prob, w, u0, eta_hat, 6);
  CHECK(nrm2(sub(a, b)) < 1e-14);

  const ProblemNC big = build_quadratic_minimax(3, 3, 5, 9);
  const DenseVec u1 = inner_shuffling_ascent(big, w, u0, 1e-300, 4, rng, 0,
                                             PermutationMode::kRandomShared);
  CHECK(nrm2(sub(u1, u0)) < 1e-12);
  CHECK_THROWS(inner_shuffling_ascent(big, w, u0, 0.0, 1, rng, 0,
                                      PermutationMode::kIdentity));
}

TEST_CASE("shuffling ascent error obeys the per-run contraction bound") {
  const ProblemNC prob = build_quadratic_minimax(4, 4, 8, 11);
  const AutoParamsNC ap = auto_params_nc(prob, DenseVec(prob.p, 0.3),
                                         DenseVec(prob.q, 0.0),
                                         NCRegime::kFullMuH, 0.05);
  const double eta_hat = ap.eta_hat;
  const long S = 4;
  for (int seed = 0; seed < 20; ++seed) {
    RngStream s = Rng(500 + seed).stream("c3");
    const DenseVec w = random_vec(s, prob.p, 1.0);
    const DenseVec us = prob.exact_u_star(w);
    const DenseVec u0 = random_vec(s, prob.q, 1.5);
    Rng rng(seed);
    const DenseVec uS = inner_shuffling_ascent(prob, w, u0, eta_hat, S, rng, 0,
                                               PermutationMode::kRandomShared);
    const double err_sq = nrm2_sq(sub(uS, us));
    const double g2 = nrm2_sq(prob.exact_grad_Phi0(w));
    const double bound =
        shuffling_ascent_bound(prob, eta_hat, S, nrm2_sq(sub(u0, us)), g2);
    CHECK(bound - err_sq >= -1e-10);
  }
}

TEST_CASE("starting at the saddle point keeps the iterate stationary") {
  // n = 1 so the outer epoch is a single exact proximal-gradient step
  const ProblemNC prob = build_quadratic_minimax(4, 4, 1, 13);
  const DenseVec us = prob.exact_u_star(prob.w_star);
  ConfigNC cfg;
  cfg.regime = NCRegime::kSemi;
  cfg.eta = 0.05;
  cfg.eta_hat = 1.0 / (prob.constants.L_u + prob.constants.mu_H);
  cfg.S = 5;
  cfg.T = 10;
  const SolveResultNC r = solve_nc(prob, prob.w_star, us, cfg);
  REQUIRE(r.status == SolveStatus::kOk);
  CHECK(nrm2(sub(r.w_final, prob.w_star)) < 1e-9);
  CHECK(r.trace.back().grad_map_norm_w < 1e-9);
  CHECK(r.trace.back().u_gap < 1e-9);
}

TEST_CASE("frozen outer step: the inner gap decays geometrically") {
  const ProblemNC prob = build_quadratic_minimax(3, 3, 4, 15);
  const ConstantsNC& c = prob.constants;
  const double eta_hat = 1.0 / (c.L_u + c.mu_H);
  const double rho_step = 1.0 - 2.0 * c.L_u * c.mu_H * eta_hat / (c.L_u + c.mu_H);
  const long S = 3;
  const double epoch_factor = std::pow(std::sqrt(rho_step), S);
  ConfigNC cfg;
  cfg.regime = NCRegime::kSemi;
  cfg.eta = 1e-300;  // w never moves
  cfg.eta_hat = eta_hat;
  cfg.S = S;
  cfg.T = 12;
  const SolveResultNC r = solve_nc(prob, DenseVec(prob.p, 0.4),
                                   DenseVec(prob.q, 2.0), cfg);
  REQUIRE(r.status == SolveStatus::kOk);
  double prev = std::numeric_limits<double>::infinity();
  for (const EpochRecordNC& rec : r.trace) {
    if (std::isfinite(prev))
      CHECK(rec.u_gap <= epoch_factor * prev + 1e-13);
    prev = rec.u_gap;
  }
  CHECK(r.trace.back().u_gap < 1e-6);
}

TEST_CASE("n = 1 with a long inner loop gives monotone objective descent") {
  const ProblemNC prob = build_quadratic_minimax(3, 3, 1, 17);
  const DerivedNC d = derive_nc(prob.constants.L_w, prob.constants.L_u,
                                prob.constants.mu_H, prob.h.strong_convexity);
  ConfigNC cfg;
  cfg.regime = NCRegime::kSemi;
  cfg.eta = 0.1 / d.L_Phi0;
  cfg.eta_hat = 1.0 / (prob.constants.L_u + prob.constants.mu_H);
  cfg.S = 200;  // essentially exact inner maximization
  cfg.T = 50;
  const SolveResultNC r = solve_nc(prob, DenseVec(prob.p, 1.0),
                                   DenseVec(prob.q, 0.0), cfg);
  REQUIRE(r.status == SolveStatus::kOk);
  double prev = psi0_oracle(prob, DenseVec(prob.p, 1.0));
  for (const EpochRecordNC& rec : r.trace) {
    CHECK(rec.objective <= prev + 1e-10);
    prev = rec.objective;
  }
}

TEST_CASE("full shuffling regimes reduce the gradient mapping") {
  const ProblemNC prob = build_quadratic_minimax(4, 4, 6, 19);
  for (NCRegime reg : {NCRegime::kFullMuH, NCRegime::kFullS1}) {
    ConfigNC cfg;
    cfg.regime = reg;
    cfg.epsilon = 0.05;
    cfg.seed = 2;
    cfg.target_grad_norm = 0.05;  // stop as soon as the target is met
    cfg.trace_stride = 1000;
    const SolveResultNC r = solve_nc(prob, DenseVec(prob.p, 0.5),
                                     DenseVec(prob.q, 0.0), cfg);
    REQUIRE(r.status == SolveStatus::kOk);
    CHECK(r.best_norm <= 0.05);
    if (reg == NCRegime::kFullS1) CHECK(r.S_used == 1);
    else CHECK(r.S_used >= 1);
  }
}

TEST_CASE("identical seeds reproduce the run; eval accounting is S*n and n") {
  const ProblemNC prob = build_quadratic_minimax(3, 3, 5, 21);
  ConfigNC cfg;
  cfg.regime = NCRegime::kFullMuH;
  cfg.eta = 0.02;
  cfg.eta_hat = 0.05;
  cfg.S = 4;
  cfg.T = 15;
  cfg.seed = 7;
  const DenseVec w0(prob.p, 0.3), u0(prob.q, 0.1);
  const SolveResultNC a = solve_nc(prob, w0, u0, cfg);
  const SolveResultNC b = solve_nc(prob, w0, u0, cfg);
  REQUIRE(a.trace.size() == b.trace.size());
  CHECK(a.w_final == b.w_final);
  CHECK(a.u_final == b.u_final);
  for (std::size_t k = 0; k < a.trace.size(); ++k) {
    CHECK(a.trace[k].objective == b.trace[k].objective);
    CHECK(a.trace[k].grad_map_norm_w == b.trace[k].grad_map_norm_w);
    // cumulative counts: S*n ascent gradients and n descent gradients per epoch
    const long t = a.trace[k].t;
    CHECK(a.trace[k].gradu_evals == cfg.S * prob.n * t);
    CHECK(a.trace[k].gradw_evals == prob.n * t);
  }
  cfg.seed = 8;
  const SolveResultNC c = solve_nc(prob, w0, u0, cfg);
  CHECK(c.w_final != a.w_final);
}

TEST_CASE("semi regime eval accounting counts full ascent passes") {
  const ProblemNC prob = build_quadratic_minimax(3, 3, 4, 23);
  ConfigNC cfg;
  cfg.regime = NCRegime::kSemi;
  cfg.eta = 0.02;
  cfg.eta_hat = 1.0 / (prob.constants.L_u + prob.constants.mu_H);
  cfg.S = 6;
  cfg.T = 5;
  const SolveResultNC r = solve_nc(prob, DenseVec(prob.p, 0.2),
                                   DenseVec(prob.q, 0.0), cfg);
  for (const EpochRecordNC& rec : r.trace) {
    CHECK(rec.gradu_evals == cfg.S * prob.n * rec.t);
    CHECK(rec.gradw_evals == prob.n * rec.t);
  }
}

TEST_CASE("invalid inputs are rejected") {
  const ProblemNC prob = build_quadratic_minimax(3, 3, 4, 25);
  ConfigNC cfg;
  cfg.eta = 0.05;
  cfg.eta_hat = 0.05;
  cfg.S = 2;
  cfg.T = 3;
  CHECK_THROWS(solve_nc(prob, DenseVec(2, 0.0), DenseVec(3, 0.0), cfg));
  CHECK_THROWS(solve_nc(prob, DenseVec(3, 0.0), DenseVec(2, 0.0), cfg));
  ConfigNC bad = cfg;
  bad.regime = NCRegime::kSemi;
  bad.eta_hat = 100.0;  // violates the ascent step bound
  CHECK_THROWS(solve_nc(prob, DenseVec(3, 0.0), DenseVec(3, 0.0), bad));
}
