#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "minimax/data.hpp"
#include "minimax/problem.hpp"
#include "minimax/rng.hpp"

using namespace minimax;

namespace {

DenseVec random_vec(RngStream& s, int dim, double scale = 1.0) {
  DenseVec v(dim);
  for (double& x : v) x = scale * s.normal();
  return v;
}

}  // namespace

TEST_CASE("derived NL constants follow the closed forms") {
  const DerivedNL d = derive_nl(2.0, 3.0, 1.0, 1.5, 0.1, 0.4);
  const double denom = 0.5;  // mu_h + gamma
  CHECK(d.L_phi_gamma == doctest::Approx(1.5 * 1.5 / denom).epsilon(1e-15));
  CHECK(d.Q_gamma == doctest::Approx(4.0 * 2.25 / denom + 1.0 * 3.0 * 1.5).epsilon(1e-15));
  CHECK(d.L_Phi_gamma == doctest::Approx(1.0 * 1.5 * 3.0 + 4.0 * 2.25 / denom).epsilon(1e-15));
  CHECK(d.C1 == doctest::Approx(2.0 * 16.0 * std::pow(1.5, 4) / (denom * denom)).epsilon(1e-15));
  CHECK(d.C2 == doctest::Approx(2.0 * 1.0 * 2.25).epsilon(1e-15));
  CHECK(d.L_psi_gamma == doctest::Approx(d.C1 + 2.0 * d.C2 * 9.0).epsilon(1e-15));
  CHECK_THROWS(derive_nl(1, 1, 1, 1, 0.0, 0.0));
}

TEST_CASE("derived NC constants and the strong-concavity guard") {
  const DerivedNC d = derive_nc(2.0, 4.0, 1.5, 0.5);
  CHECK(d.mu_psi == 2.0);
  CHECK(d.kappa == 2.0);
  CHECK(d.L_Phi0 == 6.0);
  CHECK_THROWS_WITH_AS(derive_nc(1.0, 1.0, 0.0, 0.0),
                       "derive_nc: no strongly concave component",
                       std::invalid_argument);
}

TEST_CASE("model selection at w = 0 gives the textbook loss values") {
  const SparseDataset ds = generate_synthetic(12, 5, 3, 0.0);
  const ProblemNL prob = build_model_selection(ds);
  REQUIRE(prob.m == 4);
  REQUIRE(prob.n == 12);
  const DenseVec F1 = prob.eval_F_i(1, DenseVec(5, 0.0));
  CHECK(F1[0] == doctest::Approx(1.0).epsilon(1e-15));            // 1 - tanh(0)
  CHECK(F1[3] == doctest::Approx(std::log(2.0)).epsilon(1e-14));  // softplus(0)
}

TEST_CASE("model selection rejects bad inputs") {
  SparseDataset ds = generate_synthetic(4, 3, 1, 0.0);
  ds.labels[2] = 0.5;
  CHECK_THROWS(build_model_selection(ds));
  SparseDataset ok = generate_synthetic(4, 3, 1, 0.0);
  ModelSelectionOptions opts;
  opts.lambda = 0.0;
  CHECK_THROWS(build_model_selection(ok, opts));
}

TEST_CASE("model selection Jacobian-vector product matches finite differences") {
  const SparseDataset ds = generate_synthetic(10, 4, 5, 0.1);
  ModelSelectionOptions opts;
  opts.k_b = 3;  // exercise the block path
  const ProblemNL prob = build_model_selection(ds, opts);
  RngStream s = Rng(77).stream("fd");
  const double h = 1e-5;
  for (int t = 0; t < 50; ++t) {
    const int i = 1 + s.uniform_int(prob.n);
    const DenseVec w = random_vec(s, prob.p, 0.5);
    const DenseVec y = random_vec(s, prob.m, 1.0);
    const DenseVec jt = prob.eval_Jt_vec_i(i, w, y);
    DenseVec fd(prob.p);
    for (int k = 0; k < prob.p; ++k) {
      DenseVec wp = w, wm = w;
      wp[k] += h;
      wm[k] -= h;
      fd[k] = (dot(prob.eval_F_i(i, wp), y) - dot(prob.eval_F_i(i, wm), y)) /
              (2.0 * h);
    }
    const double scale = std::max(1.0, nrm2(jt));
    CHECK(nrm2(sub(jt, fd)) / scale < 1e-5);
  }
}

TEST_CASE("full_F equals the component mean; single component case") {
  const SparseDataset ds = generate_synthetic(7, 3, 9, 0.0);
  const ProblemNL prob = build_model_selection(ds);
  RngStream s = Rng(5).stream("mean");
  const DenseVec w = random_vec(s, 3, 1.0);
  DenseVec mean(4, 0.0);
  for (int i = 1; i <= prob.n; ++i) axpy_in(1.0, prob.eval_F_i(i, w), mean);
  mean = scaled(mean, 1.0 / prob.n);
  CHECK(nrm2(sub(full_F(prob, w), mean)) < 1e-12);

  const SparseDataset one = generate_synthetic(1, 3, 9, 0.0);
  const ProblemNL p1 = build_model_selection(one);
  CHECK(full_F(p1, w) == p1.eval_F_i(1, w));
  CHECK_THROWS(full_F(prob, DenseVec(2, 0.0)));
}

TEST_CASE("declared M_F / L_F / sigma_J dominate empirical samples") {
  const SparseDataset ds = generate_synthetic(15, 4, 13, 0.2);
  ModelSelectionOptions opts;
  opts.k_b = 5;
  const ProblemNL prob = build_model_selection(ds, opts);
  const ConstantsNL& c = prob.constants;
  RngStream s = Rng(101).stream("emp");
  for (int t = 0; t < 100; ++t) {
    const DenseVec w1 = random_vec(s, prob.p, 2.0);
    const DenseVec w2 = random_vec(s, prob.p, 2.0);
    DenseVec y = random_vec(s, prob.m, 1.0);
    const double yn = nrm2(y);
    if (yn == 0.0) continue;
    y = scaled(y, 1.0 / yn);
    DenseVec meanJ(prob.p, 0.0);
    std::vector<DenseVec> per;
    for (int i = 1; i <= prob.n; ++i) {
      per.push_back(prob.eval_Jt_vec_i(i, w1, y));
      axpy_in(1.0, per.back(), meanJ);
      // operator-norm bound via unit y: ||J_i^T y|| <= M_F
      CHECK(nrm2(per.back()) <= c.M_F + 1e-9);
      // Lipschitz of the Jacobian
      const DenseVec g2 = prob.eval_Jt_vec_i(i, w2, y);
      const double dw = nrm2(sub(w1, w2));
      if (dw > 1e-12)
        CHECK(nrm2(sub(per.back(), g2)) <= c.L_F * dw + 1e-9);
    }
    meanJ = scaled(meanJ, 1.0 / prob.n);
    double var = 0.0;
    for (const DenseVec& g : per) var += nrm2_sq(sub(g, meanJ));
    CHECK(var / prob.n <= c.sigma_J * c.sigma_J + 1e-9);
  }
  CHECK(c.Lambda0 == 2.0);
  CHECK(c.Psi0_lower_bound == 0.0);
}

TEST_CASE("quadratic benchmark oracle: u* at zero and Danskin gradient") {
  const ProblemNC prob = build_quadratic_minimax(3, 3, 4, 21);
  REQUIRE(prob.exact_u_star);
  // u*(0) solves max_u of H(0, u): full_gradu_H at (0, u*(0)) vanishes
  const DenseVec u0 = prob.exact_u_star(DenseVec(3, 0.0));
  CHECK(nrm2(full_gradu_H(prob, DenseVec(3, 0.0), u0)) < 1e-12);

  RngStream s = Rng(31).stream("danskin");
  const double h = 1e-5;
  for (int t = 0; t < 20; ++t) {
    const DenseVec w = random_vec(s, 3, 1.0);
    const DenseVec g = prob.exact_grad_Phi0(w);
    DenseVec fd(3);
    for (int k = 0; k < 3; ++k) {
      DenseVec wp = w, wm = w;
      wp[k] += h;
      wm[k] -= h;
      fd[k] = (prob.exact_Phi0(wp) - prob.exact_Phi0(wm)) / (2.0 * h);
    }
    CHECK(nrm2(sub(g, fd)) / std::max(1.0, nrm2(g)) < 1e-6);
  }
}

TEST_CASE("quadratic benchmark partial gradients match finite differences") {
  const ProblemNC prob = build_quadratic_minimax(4, 3, 5, 33);
  RngStream s = Rng(41).stream("fd2");
  const double h = 1e-5;
  for (int t = 0; t < 30; ++t) {
    const int i = 1 + s.uniform_int(prob.n);
    const DenseVec w = random_vec(s, prob.p, 1.0);
    const DenseVec u = random_vec(s, prob.q, 1.0);
    const DenseVec gw = prob.eval_gradw_H_i(i, w, u);
    const DenseVec gu = prob.eval_gradu_H_i(i, w, u);
    for (int k = 0; k < prob.p; ++k) {
      DenseVec wp = w, wm = w;
      wp[k] += h;
      wm[k] -= h;
      const double fd = (prob.eval_H_i(i, wp, u) - prob.eval_H_i(i, wm, u)) / (2 * h);
      CHECK(std::fabs(gw[k] - fd) < 1e-5 * std::max(1.0, std::fabs(gw[k])));
    }
    for (int k = 0; k < prob.q; ++k) {
      DenseVec up = u, um = u;
      up[k] += h;
      um[k] -= h;
      const double fd = (prob.eval_H_i(i, w, up) - prob.eval_H_i(i, w, um)) / (2 * h);
      CHECK(std::fabs(gu[k] - fd) < 1e-5 * std::max(1.0, std::fabs(gu[k])));
    }
  }
}

TEST_CASE("quadratic benchmark strong concavity in u") {
  const ProblemNC prob = build_quadratic_minimax(3, 4, 6, 55);
  const double muH = prob.constants.mu_H;
  REQUIRE(muH > 0.0);
  RngStream s = Rng(61).stream("curv");
  const double h = 1e-4;
  for (int t = 0; t < 30; ++t) {
    const DenseVec w = random_vec(s, prob.p, 1.0);
    const DenseVec u = random_vec(s, prob.q, 1.0);
    DenseVec dir = random_vec(s, prob.q, 1.0);
    const double dn = nrm2(dir);
    if (dn == 0.0) continue;
    dir = scaled(dir, 1.0 / dn);
    // second difference along dir must certify curvature <= -mu_H
    const double f0 = full_H(prob, w, u);
    const double fp = full_H(prob, w, axpy(h, dir, u));
    const double fm = full_H(prob, w, axpy(-h, dir, u));
    const double second = (fp - 2.0 * f0 + fm) / (h * h);
    CHECK(second <= -muH + 1e-6);
  }
}

TEST_CASE("quadratic benchmark Lipschitz and variance constants hold") {
  QuadraticOptions opts;
  const ProblemNC prob = build_quadratic_minimax(4, 4, 6, 71, opts);
  const ConstantsNC& c = prob.constants;
  RngStream s = Rng(81).stream("cnst");
  for (int t = 0; t < 100; ++t) {
    // constants are declared on the region ||w|| <= R_w, ||u|| <= R_u
    DenseVec w1 = random_vec(s, prob.p, 1.0);
    w1 = scaled(w1, opts.region_w * s.uniform() / std::max(1e-12, nrm2(w1)));
    DenseVec u1 = random_vec(s, prob.q, 1.0);
    u1 = scaled(u1, opts.region_u * s.uniform() / std::max(1e-12, nrm2(u1)));
    const DenseVec w2 = random_vec(s, prob.p, 1.0);
    const DenseVec u2 = random_vec(s, prob.q, 1.0);
    const double dz = std::sqrt(nrm2_sq(sub(w1, w2)) + nrm2_sq(sub(u1, u2)));
    for (int i = 1; i <= prob.n; ++i) {
      CHECK(nrm2(sub(prob.eval_gradw_H_i(i, w1, u1), prob.eval_gradw_H_i(i, w2, u2))) <=
            c.L_w * dz + 1e-9);
      CHECK(nrm2(sub(prob.eval_gradu_H_i(i, w1, u1), prob.eval_gradu_H_i(i, w2, u2))) <=
            c.L_u * dz + 1e-9);
    }
    // component variance bounds (Theta = 0 convention on the region)
    const DenseVec gw = full_gradw_H(prob, w1, u1);
    const DenseVec gu = full_gradu_H(prob, w1, u1);
    double vw = 0.0, vu = 0.0;
    for (int i = 1; i <= prob.n; ++i) {
      vw += nrm2_sq(sub(prob.eval_gradw_H_i(i, w1, u1), gw));
      vu += nrm2_sq(sub(prob.eval_gradu_H_i(i, w1, u1), gu));
    }
    CHECK(vw / prob.n <= c.sigma_w * c.sigma_w + 1e-9);
    CHECK(vu / prob.n <= c.sigma_u * c.sigma_u + 1e-9);
  }
}

TEST_CASE("quadratic benchmark w* minimizes Psi_0 and sets the lower bound") {
  const ProblemNC prob = build_quadratic_minimax(5, 5, 8, 7);
  REQUIRE(!prob.w_star.empty());
  // stationarity: grad Phi_0(w*) + lambda w* = 0
  DenseVec g = prob.exact_grad_Phi0(prob.w_star);
  axpy_in(QuadraticOptions{}.lambda, prob.w_star, g);
  CHECK(nrm2(g) < 1e-9);
  const double psi_star = psi0_oracle(prob, prob.w_star);
  CHECK(psi_star == doctest::Approx(prob.constants.Psi0_lower_bound).epsilon(1e-12));
  RngStream s = Rng(91).stream("lb");
  for (int t = 0; t < 50; ++t)
    CHECK(psi0_oracle(prob, random_vec(s, 5, 2.0)) >= psi_star - 1e-10);
}

TEST_CASE("lagrangian ties H, f, h together") {
  const ProblemNC prob = build_quadratic_minimax(2, 2, 3, 3);
  RngStream s = Rng(13).stream("lag");
  const DenseVec w = random_vec(s, 2, 1.0), u = random_vec(s, 2, 1.0);
  CHECK(lagrangian(prob, w, u) ==
        doctest::Approx(full_H(prob, w, u) + prob.f.evaluate(w)).epsilon(1e-14));
  // at u*(w) the Lagrangian equals Psi_0(w) (h = 0)
  const DenseVec us = prob.exact_u_star(w);
  CHECK(lagrangian(prob, w, us) == doctest::Approx(psi0_oracle(prob, w)).epsilon(1e-10));
}

TEST_CASE("l1-ball-h quadratic variant constructs with valid lower bound") {
  QuadraticOptions opts;
  opts.l1_ball_h = true;
  const ProblemNC prob = build_quadratic_minimax(3, 3, 4, 17, opts);
  CHECK(!prob.exact_u_star);
  CHECK(prob.h.domain_bound == 1.0);
  CHECK(prob.constants.Lambda1_hat > 0.0);
  // Psi_0(w) >= H(w, u) - h(u) lower bound sanity on the region at a few points
  RngStream s = Rng(19).stream("l1lb");
  for (int t = 0; t < 20; ++t) {
    DenseVec w = random_vec(s, 3, 1.0);
    w = scaled(w, opts.region_w * s.uniform() / std::max(1e-12, nrm2(w)));
    // evaluate the inner max approximately over a few candidate u in the ball
    double best = -1e300;
    for (int k = 0; k < 200; ++k) {
      DenseVec u = random_vec(s, 3, 1.0);
      u = prob.h.prox(u, 1.0);  // project into the ball
      best = std::max(best, full_H(prob, w, u));
    }
    const double psi_lower_est = best + prob.f.evaluate(w);
    CHECK(psi_lower_est >= prob.constants.Psi0_lower_bound - 1e-9);
  }
}

TEST_CASE("component index bounds are enforced") {
  const ProblemNC nc = build_quadratic_minimax(2, 2, 3, 1);
  CHECK_THROWS(nc.check_index(0));
  CHECK_THROWS(nc.check_index(4));
  const SparseDataset ds = generate_synthetic(3, 2, 1, 0.0);
  const ProblemNL nl = build_model_selection(ds);
  CHECK_THROWS(nl.check_index(0));
  CHECK_THROWS(nl.check_index(4));
}
