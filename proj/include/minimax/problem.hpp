// Problem interfaces for the (NL) and (NC) settings plus the two concrete
// benchmarks: the model-selection instance with four nonconvex losses, and a
// quadratic minimax instance with a closed-form inner maximizer.
//
// All gradients are hand-coded; the tests confirm them against central finite
// differences. No automatic differentiation anywhere.
#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

#include "minimax/data.hpp"
#include "minimax/linalg.hpp"
#include "minimax/prox.hpp"
#include "minimax/rng.hpp"

namespace minimax {

// ---------------------------------------------------------------------------
// Constants declared by problem constructors (assumption constants).

struct ConstantsNL {
  double M_F = 0.0;      // Lipschitz bound of each F_i
  double L_F = 0.0;      // Lipschitz bound of each Jacobian
  double sigma_J = 0.0;  // Jacobian variance bound
  double Lambda0 = 1.0;  // >= 1
  double Lambda1 = 0.0;
  double Psi0_lower_bound = 0.0;
};

struct ConstantsNC {
  double L_w = 0.0, L_u = 0.0;
  double mu_H = 0.0;
  double Theta_w = 0.0, sigma_w = 0.0;
  double Theta_u = 0.0, sigma_u = 0.0;
  double Lambda0 = 1.0, Lambda1 = 0.0;
  double Lambda0_hat = 1.0, Lambda1_hat = 0.0;
  double L_f = 0.0;
  double Psi0_lower_bound = 0.0;
};

struct DerivedNL {
  double Q_gamma = 0.0;        // M_F^2||K||^2/(mu_h+gamma) + M_h L_F ||K||
  double L_phi_gamma = 0.0;    // ||K||^2/(mu_h+gamma)
  double L_Phi_gamma = 0.0;    // M_h||K||L_F + M_F^2||K||^2/(mu_h+gamma)
  double C1 = 0.0;             // 2 M_F^4 ||K||^4/(mu_h+gamma)^2
  double C2 = 0.0;             // 2 M_h^2 ||K||^2
  double L_psi_gamma = 0.0;    // C1 + 2 C2 L_F^2
};

inline DerivedNL derive_nl(double M_F, double L_F, double M_h, double K_norm,
                           double mu_h, double gamma) {
  if (mu_h + gamma <= 0.0)
    throw std::invalid_argument("derive_nl: need mu_h + gamma > 0");
  DerivedNL d;
  const double K2 = K_norm * K_norm;
  d.L_phi_gamma = K2 / (mu_h + gamma);
  d.Q_gamma = M_F * M_F * d.L_phi_gamma + M_h * L_F * K_norm;
  d.L_Phi_gamma = M_h * K_norm * L_F + M_F * M_F * d.L_phi_gamma;
  d.C1 = 2.0 * std::pow(M_F, 4) * K2 * K2 / ((mu_h + gamma) * (mu_h + gamma));
  d.C2 = 2.0 * M_h * M_h * K2;
  d.L_psi_gamma = d.C1 + 2.0 * d.C2 * L_F * L_F;
  return d;
}

struct DerivedNC {
  double kappa = 0.0;   // L_u / (mu_H + mu_h)
  double L_Phi0 = 0.0;  // (1 + kappa) L_w
  double mu_psi = 0.0;  // mu_H + mu_h
};

inline DerivedNC derive_nc(double L_w, double L_u, double mu_H, double mu_h) {
  if (mu_H + mu_h <= 0.0)
    throw std::invalid_argument("derive_nc: no strongly concave component");
  DerivedNC d;
  d.mu_psi = mu_H + mu_h;
  d.kappa = L_u / d.mu_psi;
  d.L_Phi0 = (1.0 + d.kappa) * L_w;
  return d;
}

// ---------------------------------------------------------------------------
// (NL): H_i(w, u) = <F_i(w), Ku>. Component indices are 1-based.

struct ProblemNL {
  int n = 0, p = 0, m = 0;
  std::function<DenseVec(int, const DenseVec&)> eval_F_i;  // (i, w) -> R^m
  // (i, w, y) -> grad F_i(w)^T y in R^p (Jacobian-transpose-vector product)
  std::function<DenseVec(int, const DenseVec&, const DenseVec&)> eval_Jt_vec_i;
  LinearOperator K;
  ProxFn f, h;
  ConstantsNL constants;

  void check_index(int i) const {
    if (i < 1 || i > n) throw std::out_of_range("ProblemNL: component index");
  }
};

inline DenseVec full_F(const ProblemNL& prob, const DenseVec& w) {
  if (static_cast<int>(w.size()) != prob.p)
    throw std::invalid_argument("full_F: dimension mismatch");
  DenseVec acc(prob.m, 0.0);
  for (int i = 1; i <= prob.n; ++i) axpy_in(1.0, prob.eval_F_i(i, w), acc);
  return scaled(acc, 1.0 / prob.n);
}

// (1/n) sum_i grad F_i(w)^T y
inline DenseVec full_Jt_vec(const ProblemNL& prob, const DenseVec& w,
                            const DenseVec& y) {
  DenseVec acc(prob.p, 0.0);
  for (int i = 1; i <= prob.n; ++i)
    axpy_in(1.0, prob.eval_Jt_vec_i(i, w, y), acc);
  return scaled(acc, 1.0 / prob.n);
}

// Psi_gamma(w) = phi_gamma(F(w)) + f(w); one full pass over the components.
inline double psi_gamma(const ProblemNL& prob, const DenseVec& w,
                        const SmoothingSpec& s) {
  const DenseVec Fw = full_F(prob, w);
  return smoothed_conjugate(Fw, prob.K, prob.h, s).value + prob.f.evaluate(w);
}

// Exact grad Phi_gamma(w) = grad F(w)^T K u*_gamma(F(w)); two full passes.
inline DenseVec grad_phi_gamma_exact(const ProblemNL& prob, const DenseVec& w,
                                     const SmoothingSpec& s) {
  const DenseVec Fw = full_F(prob, w);
  const DenseVec ku = prob.K.apply(smoothed_conjugate(Fw, prob.K, prob.h, s).u_star);
  return full_Jt_vec(prob, w, ku);
}

// ---------------------------------------------------------------------------
// Model-selection benchmark: four nonconvex losses of the margin z = b<a, w>,
//   F1 = 1 - tanh(z)
//   F2 = softplus(-z) - softplus(-z - 1)
//   F3 = sigmoid(-z)^2
//   F4 = softplus(-z)
// with K = I on R^4, f = (lambda/2)||w||^2, h = indicator of the l1 ball.

namespace losses {

// exp arguments clamped at +-30; gradients reuse the same clamped primitives
// so analytic and finite-difference values agree.
inline double clamp_exp_arg(double x) { return x > 30.0 ? 30.0 : (x < -30.0 ? -30.0 : x); }

inline double sigmoid(double z) {
  if (z >= 0.0) {
    const double e = std::exp(clamp_exp_arg(-z));
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(clamp_exp_arg(z));
  return e / (1.0 + e);
}

inline double softplus(double x) {  // log(1 + e^x)
  if (x > 30.0) return x;
  return std::log1p(std::exp(clamp_exp_arg(x)));
}

// values F(z) in R^4
inline void eval(double z, double out[4]) {
  const double t = std::tanh(z);
  const double s = sigmoid(-z);
  out[0] = 1.0 - t;
  out[1] = softplus(-z) - softplus(-z - 1.0);
  out[2] = s * s;
  out[3] = softplus(-z);
}

// derivatives dF/dz in R^4
inline void deriv(double z, double out[4]) {
  const double t = std::tanh(z);
  const double s = sigmoid(-z);
  out[0] = -(1.0 - t * t);
  out[1] = -s + sigmoid(-z - 1.0);
  out[2] = -2.0 * s * s * (1.0 - s);
  out[3] = -s;
}

// sup_z of |dF_k/dz| and |d2F_k/dz2| per component (used for M_F, L_F):
//   |F1'| <= 1,     |F1''| <= 4/(3*sqrt(3))
//   |F2'| <= 1/4,   |F2''| <= 1/4
//   |F3'| <= 8/27,  |F3''| <= 0.16
//   |F4'| <= 1,     |F4''| <= 1/4
inline double deriv_bound_norm() {
  const double c1 = 1.0, c2 = 0.25, c3 = 8.0 / 27.0, c4 = 1.0;
  return std::sqrt(c1 * c1 + c2 * c2 + c3 * c3 + c4 * c4);
}

inline double second_deriv_bound_norm() {
  const double c1 = 4.0 / (3.0 * std::sqrt(3.0)), c2 = 0.25, c3 = 0.16, c4 = 0.25;
  return std::sqrt(c1 * c1 + c2 * c2 + c3 * c3 + c4 * c4);
}

}  // namespace losses

struct ModelSelectionOptions {
  double lambda = 1e-4;
  int k_b = 0;                 // 0 => one sample per component
  double region_radius = 10.0; // declared iterate-region radius R for Lambda1
  double l1_radius = 1.0;      // radius of dom h
};

// Each block of the partition acts as one shuffling component i; F_i is the
// block average of the per-sample loss vectors.
inline ProblemNL build_model_selection(const SparseDataset& data,
                                       const ModelSelectionOptions& opts = {}) {
  if (data.n < 1) throw std::invalid_argument("build_model_selection: empty dataset");
  if (opts.lambda <= 0.0)
    throw std::invalid_argument("build_model_selection: lambda <= 0");
  for (double b : data.labels)
    if (b != 1.0 && b != -1.0)
      throw std::invalid_argument("build_model_selection: label outside {-1,+1}");

  const int k_b = opts.k_b > 0 ? opts.k_b : data.n;
  auto blocks = std::make_shared<std::vector<std::pair<int, int>>>(
      partition_blocks(data, k_b));
  auto ds = std::make_shared<SparseDataset>(data);

  ProblemNL prob;
  prob.n = k_b;
  prob.p = data.p;
  prob.m = 4;
  prob.K = identity_operator(4);
  prob.f = l2_squared_fn(opts.lambda);
  prob.h = l1_ball_indicator_fn(opts.l1_radius);

  prob.eval_F_i = [ds, blocks](int i, const DenseVec& w) {
    const auto [b0, b1] = (*blocks)[i - 1];
    double acc[4] = {0, 0, 0, 0}, v[4];
    for (int j = b0; j < b1; ++j) {
      const double z = ds->labels[j] * sparse_dot(ds->rows[j], w);
      losses::eval(z, v);
      for (int k = 0; k < 4; ++k) acc[k] += v[k];
    }
    const double inv = 1.0 / (b1 - b0);
    return DenseVec{acc[0] * inv, acc[1] * inv, acc[2] * inv, acc[3] * inv};
  };

  prob.eval_Jt_vec_i = [ds, blocks](int i, const DenseVec& w, const DenseVec& y) {
    const auto [b0, b1] = (*blocks)[i - 1];
    DenseVec out(w.size(), 0.0);
    const double inv = 1.0 / (b1 - b0);
    double d[4];
    for (int j = b0; j < b1; ++j) {
      const double bj = ds->labels[j];
      const double z = bj * sparse_dot(ds->rows[j], w);
      losses::deriv(z, d);
      // grad_w F_k = dF_k/dz * b_j a_j, so J^T y = (sum_k y_k dF_k/dz) b_j a_j
      const double coeff =
          inv * bj * (y[0] * d[0] + y[1] * d[1] + y[2] * d[2] + y[3] * d[3]);
      add_scaled_sparse(coeff, ds->rows[j], out);
    }
    return out;
  };

  // M_F / L_F from the per-block data norms and the loss derivative bounds
  const double cd = losses::deriv_bound_norm();
  const double cd2 = losses::second_deriv_bound_norm();
  double mf = 0.0, lf = 0.0;
  for (const auto& [b0, b1] : *blocks) {
    double s1 = 0.0, s2 = 0.0;
    for (int j = b0; j < b1; ++j) {
      const double an = data.rows[j].norm();
      s1 += an;
      s2 += an * an;
    }
    mf = std::max(mf, cd * s1 / (b1 - b0));
    lf = std::max(lf, cd2 * s2 / (b1 - b0));
  }
  prob.constants.M_F = mf;
  prob.constants.L_F = lf;
  prob.constants.sigma_J = 2.0 * mf;  // ||grad F_i - grad F|| <= 2 M_F always
  // Lipschitz-f recipe at nu = 1 on the declared region: M_f = lambda * R
  prob.constants.Lambda0 = 2.0;
  prob.constants.Lambda1 = 2.0 * opts.lambda * opts.region_radius;
  prob.constants.Psi0_lower_bound = 0.0;  // all losses and f are nonnegative
  return prob;
}

// ---------------------------------------------------------------------------
// (NC): general interface; component indices are 1-based.

struct ProblemNC {
  int n = 0, p = 0, q = 0;
  std::function<double(int, const DenseVec&, const DenseVec&)> eval_H_i;
  std::function<DenseVec(int, const DenseVec&, const DenseVec&)> eval_gradw_H_i;
  std::function<DenseVec(int, const DenseVec&, const DenseVec&)> eval_gradu_H_i;
  ProxFn f, h;
  ConstantsNC constants;

  // oracle extras (null/empty on non-oracle instances)
  std::function<DenseVec(const DenseVec&)> exact_u_star;
  std::function<double(const DenseVec&)> exact_Phi0;
  std::function<DenseVec(const DenseVec&)> exact_grad_Phi0;
  DenseVec w_star;  // argmin of Psi_0 when known

  void check_index(int i) const {
    if (i < 1 || i > n) throw std::out_of_range("ProblemNC: component index");
  }
};

inline double full_H(const ProblemNC& prob, const DenseVec& w, const DenseVec& u) {
  double s = 0.0;
  for (int i = 1; i <= prob.n; ++i) s += prob.eval_H_i(i, w, u);
  return s / prob.n;
}

inline DenseVec full_gradw_H(const ProblemNC& prob, const DenseVec& w,
                             const DenseVec& u) {
  DenseVec acc(prob.p, 0.0);
  for (int i = 1; i <= prob.n; ++i) axpy_in(1.0, prob.eval_gradw_H_i(i, w, u), acc);
  return scaled(acc, 1.0 / prob.n);
}

inline DenseVec full_gradu_H(const ProblemNC& prob, const DenseVec& w,
                             const DenseVec& u) {
  DenseVec acc(prob.q, 0.0);
  for (int i = 1; i <= prob.n; ++i) axpy_in(1.0, prob.eval_gradu_H_i(i, w, u), acc);
  return scaled(acc, 1.0 / prob.n);
}

// L(w, u) = H(w, u) + f(w) - h(u)
inline double lagrangian(const ProblemNC& prob, const DenseVec& w,
                         const DenseVec& u) {
  return full_H(prob, w, u) + prob.f.evaluate(w) - prob.h.evaluate(u);
}

// Psi_0(w) = Phi_0(w) + f(w) on oracle instances.
inline double psi0_oracle(const ProblemNC& prob, const DenseVec& w) {
  if (!prob.exact_Phi0) throw std::runtime_error("psi0_oracle: no oracle");
  return prob.exact_Phi0(w) + prob.f.evaluate(w);
}

// ---------------------------------------------------------------------------
// Quadratic minimax benchmark:
//   H_i(w,u) = <A_i w, u> - 0.5 u^T D_i u + <c_i, u> + 0.5 w^T P_i w
// with diagonal D_i >= mu_H I, symmetric (possibly indefinite) P_i, and the
// closed-form inner maximizer u*(w) = Dbar^{-1}(Abar w + cbar) when h = 0.

struct QuadraticOptions {
  double mu_H = 1.0;
  double lambda = 0.01;      // f = (lambda/2)||w||^2
  double d_spread = 0.3;     // D entries in [mu_H, mu_H + d_spread] (+ perturb)
  double perturb = 0.05;     // cross-component deviation scale
  double p_scale = 0.2;      // scale of the symmetric P part
  double min_curvature = 0.3;  // enforced lambda_min of the effective Hessian
  double region_w = 3.0;     // declared iterate-region radii for the
  double region_u = 3.0;     //   variance/Lambda constants
  bool l1_ball_h = false;    // variant with h = indicator of an l1 ball
  double l1_radius = 1.0;
};

namespace detail_quad {

struct QuadData {
  std::vector<DenseMat> A;  // q x p
  std::vector<DenseVec> Ddiag;
  std::vector<DenseMat> P;  // p x p symmetric
  std::vector<DenseVec> c;
  DenseMat Abar;
  DenseVec Dbar;
  DenseMat Pbar;
  DenseVec cbar;
};

}  // namespace detail_quad

inline ProblemNC build_quadratic_minimax(int p, int q, int n, std::uint64_t seed,
                                         const QuadraticOptions& opts = {}) {
  if (p < 1 || q < 1 || n < 1)
    throw std::invalid_argument("build_quadratic_minimax: p, q, n must be >= 1");
  Rng rng(seed);
  auto qd = std::make_shared<detail_quad::QuadData>();
  const double scale_a = 1.0 / std::sqrt(static_cast<double>(std::max(p, q)));

  {
    RngStream sa = rng.stream("A");
    RngStream sd = rng.stream("D");
    RngStream sp = rng.stream("P");
    RngStream sc = rng.stream("c");
    DenseMat Abase(q, p);
    for (double& v : Abase.a) v = sa.normal() * scale_a;
    DenseVec Dbase(q);
    for (double& v : Dbase) v = opts.mu_H + opts.d_spread * sd.uniform();
    DenseMat Pbase(p, p);
    {
      DenseMat B(p, p);
      for (double& v : B.a) v = sp.normal() / std::sqrt(static_cast<double>(p));
      for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j)
          Pbase.at(i, j) = 0.5 * opts.p_scale * (B.at(i, j) + B.at(j, i));
    }
    DenseVec cbase(q);
    for (double& v : cbase) v = 0.5 * sc.normal();

    for (int i = 0; i < n; ++i) {
      DenseMat Ai = Abase;
      for (double& v : Ai.a) v += opts.perturb * sa.normal() * scale_a;
      DenseVec Di = Dbase;
      for (double& v : Di) v += opts.perturb * sd.uniform();
      DenseMat Pi(p, p);
      {
        DenseMat B(p, p);
        for (double& v : B.a) v = sp.normal() / std::sqrt(static_cast<double>(p));
        for (int r = 0; r < p; ++r)
          for (int cc = 0; cc < p; ++cc)
            Pi.at(r, cc) =
                Pbase.at(r, cc) + 0.5 * opts.perturb * (B.at(r, cc) + B.at(cc, r));
      }
      DenseVec ci = cbase;
      for (double& v : ci) v += opts.perturb * sc.normal();
      qd->A.push_back(std::move(Ai));
      qd->Ddiag.push_back(std::move(Di));
      qd->P.push_back(std::move(Pi));
      qd->c.push_back(std::move(ci));
    }
  }

  // averages
  qd->Abar = DenseMat(q, p);
  qd->Pbar = DenseMat(p, p);
  qd->Dbar.assign(q, 0.0);
  qd->cbar.assign(q, 0.0);
  for (int i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < qd->Abar.a.size(); ++k) qd->Abar.a[k] += qd->A[i].a[k];
    for (std::size_t k = 0; k < qd->Pbar.a.size(); ++k) qd->Pbar.a[k] += qd->P[i].a[k];
    for (int k = 0; k < q; ++k) {
      qd->Dbar[k] += qd->Ddiag[i][k];
      qd->cbar[k] += qd->c[i][k];
    }
  }
  for (double& v : qd->Abar.a) v /= n;
  for (double& v : qd->Pbar.a) v /= n;
  for (double& v : qd->Dbar) v /= n;
  for (double& v : qd->cbar) v /= n;

  // Effective Hessian of Psi_0 (h = 0 case): Q_eff = Pbar + Abar^T Dbar^{-1} Abar + lambda I.
  // Shift every P_i equally so lambda_min(Q_eff) >= min_curvature: keeps the
  // benchmark's outer problem well-posed (Psi_0 bounded below, unique w*).
  DenseMat AtDA(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) {
      double s = 0.0;
      for (int k = 0; k < q; ++k)
        s += qd->Abar.at(k, i) * qd->Abar.at(k, j) / qd->Dbar[k];
      AtDA.at(i, j) = s;
    }
  DenseMat Qeff = mat_add(qd->Pbar, AtDA);
  for (int i = 0; i < p; ++i) Qeff.at(i, i) += opts.lambda;
  const double lam_min = min_eigenvalue_sym(Qeff);
  if (lam_min < opts.min_curvature) {
    const double shift = opts.min_curvature - lam_min;
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < p; ++k) qd->P[i].at(k, k) += shift;
    for (int k = 0; k < p; ++k) {
      qd->Pbar.at(k, k) += shift;
      Qeff.at(k, k) += shift;
    }
  }

  ProblemNC prob;
  prob.n = n;
  prob.p = p;
  prob.q = q;
  prob.f = l2_squared_fn(opts.lambda);
  prob.h = opts.l1_ball_h ? l1_ball_indicator_fn(opts.l1_radius) : zero_fn();

  prob.eval_H_i = [qd](int i, const DenseVec& w, const DenseVec& u) {
    const auto& A = qd->A[i - 1];
    const auto& D = qd->Ddiag[i - 1];
    const auto& P = qd->P[i - 1];
    const auto& c = qd->c[i - 1];
    const DenseVec Aw = A.apply(w);
    double s = dot(Aw, u) + dot(c, u);
    for (int k = 0; k < A.rows; ++k) s -= 0.5 * D[k] * u[k] * u[k];
    const DenseVec Pw = P.apply(w);
    s += 0.5 * dot(w, Pw);
    return s;
  };
  prob.eval_gradw_H_i = [qd](int i, const DenseVec& w, const DenseVec& u) {
    DenseVec g = qd->A[i - 1].apply_transpose(u);
    axpy_in(1.0, qd->P[i - 1].apply(w), g);
    return g;
  };
  prob.eval_gradu_H_i = [qd](int i, const DenseVec& w, const DenseVec& u) {
    DenseVec g = qd->A[i - 1].apply(w);
    const auto& D = qd->Ddiag[i - 1];
    for (std::size_t k = 0; k < g.size(); ++k)
      g[k] += qd->c[i - 1][k] - D[k] * u[k];
    return g;
  };

  // constants from the generated matrices
  ConstantsNC& cst = prob.constants;
  double Lw = 0.0, Lu = 0.0, muH = std::numeric_limits<double>::infinity();
  double sw2 = 0.0, su2 = 0.0, gu_max = 0.0;
  for (int i = 0; i < n; ++i) {
    const double na = spectral_norm(qd->A[i]);
    const double np = spectral_norm(qd->P[i]);
    double nd = 0.0, dmin = std::numeric_limits<double>::infinity();
    for (double v : qd->Ddiag[i]) {
      nd = std::max(nd, v);
      dmin = std::min(dmin, v);
    }
    Lw = std::max(Lw, std::sqrt(np * np + na * na));
    Lu = std::max(Lu, std::sqrt(na * na + nd * nd));
    muH = std::min(muH, dmin);

    // worst-case deviations over the declared region ||w||<=R_w, ||u||<=R_u
    DenseMat dA = mat_add(qd->A[i], mat_scale(qd->Abar, -1.0));
    DenseMat dP = mat_add(qd->P[i], mat_scale(qd->Pbar, -1.0));
    const double nda = spectral_norm(dA);
    const double ndp = spectral_norm(dP);
    double ndd = 0.0;
    for (int k = 0; k < q; ++k)
      ndd = std::max(ndd, std::fabs(qd->Ddiag[i][k] - qd->Dbar[k]));
    const double ndc = nrm2(sub(qd->c[i], qd->cbar));
    const double bw = ndp * opts.region_w + nda * opts.region_u;
    const double bu = nda * opts.region_w + ndd * opts.region_u + ndc;
    sw2 += bw * bw;
    su2 += bu * bu;
    gu_max = std::max(gu_max, na * opts.region_w + nd * opts.region_u + nrm2(qd->c[i]));
  }
  cst.L_w = Lw * (1.0 + 1e-12);
  cst.L_u = Lu * (1.0 + 1e-12);
  cst.mu_H = muH;
  cst.Theta_w = 0.0;
  cst.sigma_w = std::sqrt(sw2 / n);
  cst.Theta_u = 0.0;
  cst.sigma_u = std::sqrt(su2 / n);
  cst.Lambda0 = 2.0;
  cst.Lambda1 = 2.0 * opts.lambda * opts.region_w;  // Lipschitz-f recipe, nu = 1
  if (opts.l1_ball_h) {
    // on the region, ||grad_u H|| is bounded, which dominates any prox shift
    cst.Lambda0_hat = 1.0;
    cst.Lambda1_hat = gu_max * gu_max;
  } else {
    cst.Lambda0_hat = 1.0;  // h = 0: Ghat = -grad_u H exactly
    cst.Lambda1_hat = 0.0;
  }
  cst.L_f = opts.lambda;

  // oracle pieces (exact inner maximizer exists only for h = 0)
  if (!opts.l1_ball_h) {
    prob.exact_u_star = [qd](const DenseVec& w) {
      DenseVec u = qd->Abar.apply(w);
      for (std::size_t k = 0; k < u.size(); ++k)
        u[k] = (u[k] + qd->cbar[k]) / qd->Dbar[k];
      return u;
    };
    prob.exact_Phi0 = [qd](const DenseVec& w) {
      DenseVec r = qd->Abar.apply(w);
      axpy_in(1.0, qd->cbar, r);
      double s = 0.0;
      for (std::size_t k = 0; k < r.size(); ++k) s += 0.5 * r[k] * r[k] / qd->Dbar[k];
      return s + 0.5 * dot(w, qd->Pbar.apply(w));
    };
    prob.exact_grad_Phi0 = [qd](const DenseVec& w) {
      DenseVec u = qd->Abar.apply(w);
      for (std::size_t k = 0; k < u.size(); ++k)
        u[k] = (u[k] + qd->cbar[k]) / qd->Dbar[k];
      DenseVec g = qd->Abar.apply_transpose(u);
      axpy_in(1.0, qd->Pbar.apply(w), g);
      return g;
    };
    // w* = -Q_eff^{-1} Abar^T Dbar^{-1} cbar, Psi0* = Psi0(w*)
    DenseVec dc(q);
    for (int k = 0; k < q; ++k) dc[k] = qd->cbar[k] / qd->Dbar[k];
    DenseVec g = qd->Abar.apply_transpose(dc);
    prob.w_star = solve_dense(Qeff, scaled(g, -1.0));
    cst.Psi0_lower_bound = prob.exact_Phi0(prob.w_star) + prob.f.evaluate(prob.w_star);
  } else {
    // valid on the declared region: Psi_0(w) >= 0.5 w^T(Pbar + lambda I)w
    // >= -0.5 ||Abar^T Dbar^{-1} Abar|| R_w^2 (using the Q_eff curvature shift)
    cst.Psi0_lower_bound =
        -0.5 * spectral_norm(AtDA) * opts.region_w * opts.region_w;
  }
  return prob;
}

}  // namespace minimax
