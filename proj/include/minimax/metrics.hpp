// Stationarity and KKT diagnostics: gradient mappings, KKT residual
// construction, output-point selection, and the optional potential diagnostic.
#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "minimax/linalg.hpp"
#include "minimax/problem.hpp"
#include "minimax/prox.hpp"
#include "minimax/rng.hpp"

namespace minimax {

// G_eta(w) = eta^{-1} (w - prox_{eta f}(w - eta * grad_phi))
inline DenseVec grad_mapping_w(const DenseVec& w, const DenseVec& grad_phi,
                               const ProxFn& f, double eta) {
  if (eta <= 0.0) throw std::invalid_argument("grad_mapping_w: eta <= 0");
  check_same_dim(w, grad_phi, "grad_mapping_w");
  DenseVec step = axpy(-eta, grad_phi, w);
  DenseVec px = f.prox(step, eta);
  DenseVec g = sub(w, px);
  return scaled(g, 1.0 / eta);
}

// Ghat_eta(u) = eta^{-1} (u - prox_{eta h}(u + eta * grad_u_H))  (ascent form)
inline DenseVec grad_mapping_u(const DenseVec& u, const DenseVec& grad_u_H,
                               const ProxFn& h, double eta) {
  if (eta <= 0.0) throw std::invalid_argument("grad_mapping_u: eta <= 0");
  check_same_dim(u, grad_u_H, "grad_mapping_u");
  DenseVec step = axpy(eta, grad_u_H, u);
  DenseVec px = h.prox(step, eta);
  DenseVec g = sub(u, px);
  return scaled(g, 1.0 / eta);
}

struct GradMappingReport {
  DenseVec g_w;
  double norm_w = 0.0;
  std::optional<DenseVec> g_u;
  std::optional<double> norm_u;
  double eta_used = 0.0;
  bool smoothed = false;  // whether grad_phi was grad Phi_gamma (vs Phi_0)
};

inline GradMappingReport make_grad_mapping_report(const DenseVec& w,
                                                  const DenseVec& grad_phi,
                                                  const ProxFn& f, double eta,
                                                  bool smoothed = false) {
  GradMappingReport r;
  r.g_w = grad_mapping_w(w, grad_phi, f, eta);
  r.norm_w = nrm2(r.g_w);
  r.eta_used = eta;
  r.smoothed = smoothed;
  return r;
}

// ---------------------------------------------------------------------------
// Inner maximizer to tolerance (for (NC) metrics without the exact oracle):
// prox-gradient ascent with step 1/L_u until ||Ghat|| <= tol.

inline DenseVec approx_u_star(const ProblemNC& prob, const DenseVec& w,
                              double tol = 1e-8, int max_iter = 100000) {
  DenseVec u(prob.q, 0.0);
  const double step = 1.0 / prob.constants.L_u;
  for (int it = 0; it < max_iter; ++it) {
    const DenseVec gu = full_gradu_H(prob, w, u);
    const DenseVec gm = grad_mapping_u(u, gu, prob.h, step);
    if (nrm2(gm) <= tol) return u;
    u = prob.h.prox(axpy(step, gu, u), step);
  }
  return u;
}

// grad Phi_0(w) via Danskin: exact oracle when available, else inner solve.
inline DenseVec grad_phi0_nc(const ProblemNC& prob, const DenseVec& w,
                             double inner_tol = 1e-8,
                             bool* used_oracle = nullptr) {
  if (prob.exact_grad_Phi0) {
    if (used_oracle) *used_oracle = true;
    return prob.exact_grad_Phi0(w);
  }
  if (used_oracle) *used_oracle = false;
  const DenseVec u = approx_u_star(prob, w, inner_tol);
  return full_gradw_H(prob, w, u);
}

// ---------------------------------------------------------------------------
// KKT residuals.

struct KKTResidual {
  DenseVec r_w, r_u;
  double joint_norm = 0.0;
  DenseVec w_bar, u_bar;
  // post-check bounds carried along for diagnostics
  double bound_r_w = 0.0;  // (1 + eta*L) * ||G_eta(w_hat)||
  double bound_r_u = 0.0;  // gamma * D_b (NL) or inner tolerance (NC)
};

// (NL): w_bar = prox_{eta f}(w_hat - eta grad Phi_gamma(w_hat)),
//       u_bar = u*_gamma(F(w_bar)),
//       r_w = eta^{-1}(w_hat - w_bar) + grad Phi_gamma(w_bar) - grad Phi_gamma(w_hat),
//       r_u = -gamma * grad b(u_bar).
inline KKTResidual kkt_residual_nl(const ProblemNL& prob, const DenseVec& w_hat,
                                   const SmoothingSpec& s, double eta) {
  if (eta <= 0.0) throw std::invalid_argument("kkt_residual_nl: eta <= 0");
  const DenseVec g_hat = grad_phi_gamma_exact(prob, w_hat, s);
  KKTResidual r;
  r.w_bar = prob.f.prox(axpy(-eta, g_hat, w_hat), eta);
  const DenseVec F_bar = full_F(prob, r.w_bar);
  r.u_bar = smoothed_conjugate(F_bar, prob.K, prob.h, s).u_star;
  const DenseVec g_bar = grad_phi_gamma_exact(prob, r.w_bar, s);
  r.r_w = scaled(sub(w_hat, r.w_bar), 1.0 / eta);
  axpy_in(1.0, g_bar, r.r_w);
  axpy_in(-1.0, g_hat, r.r_w);
  r.r_u = scaled(sub(r.u_bar, s.anchor_u), -s.gamma);  // -gamma grad b(u_bar)
  r.joint_norm = std::sqrt(nrm2_sq(r.r_w) + nrm2_sq(r.r_u));

  const DenseVec gm = grad_mapping_w(w_hat, g_hat, prob.f, eta);
  const double L_Phi =
      derive_nl(prob.constants.M_F, prob.constants.L_F, prob.h.domain_bound,
                prob.K.norm_bound, prob.h.strong_convexity, s.gamma)
          .L_Phi_gamma;
  r.bound_r_w = (1.0 + eta * L_Phi) * nrm2(gm);
  r.bound_r_u = s.gamma * s.grad_b_sup;
  return r;
}

// (NC): w_bar = prox_{eta f}(w_hat - eta grad Phi_0(w_hat)), u_bar = u*_0(w_bar);
//       r_w = e_T = G_eta(w_hat) + grad Phi_0(w_bar) - grad Phi_0(w_hat);
//       r_u = 0 with the exact oracle, else the inner gradient-mapping residual.
inline KKTResidual kkt_residual_nc(const ProblemNC& prob, const DenseVec& w_hat,
                                   double eta, double inner_tol = 1e-8) {
  if (eta <= 0.0) throw std::invalid_argument("kkt_residual_nc: eta <= 0");
  if (!prob.exact_u_star && inner_tol <= 0.0)
    throw std::invalid_argument("kkt_residual_nc: no oracle and no tolerance");
  const DenseVec g_hat = grad_phi0_nc(prob, w_hat, inner_tol);
  KKTResidual r;
  r.w_bar = prob.f.prox(axpy(-eta, g_hat, w_hat), eta);
  const DenseVec g_bar = grad_phi0_nc(prob, r.w_bar, inner_tol);
  r.r_w = scaled(sub(w_hat, r.w_bar), 1.0 / eta);  // g_T
  const DenseVec gm = r.r_w;                       // G_eta(w_hat)
  axpy_in(1.0, g_bar, r.r_w);
  axpy_in(-1.0, g_hat, r.r_w);
  if (prob.exact_u_star) {
    r.u_bar = prob.exact_u_star(r.w_bar);
    r.r_u.assign(prob.q, 0.0);
    r.bound_r_u = 0.0;
  } else {
    r.u_bar = approx_u_star(prob, r.w_bar, inner_tol);
    const DenseVec gu = full_gradu_H(prob, r.w_bar, r.u_bar);
    r.r_u = scaled(grad_mapping_u(r.u_bar, gu, prob.h, 1.0 / prob.constants.L_u), -1.0);
    r.bound_r_u = inner_tol;
  }
  r.joint_norm = std::sqrt(nrm2_sq(r.r_w) + nrm2_sq(r.r_u));
  const double L_Phi0 = derive_nc(prob.constants.L_w, prob.constants.L_u,
                                  prob.constants.mu_H, prob.h.strong_convexity)
                            .L_Phi0;
  r.bound_r_w = (1.0 + L_Phi0 * eta) * nrm2(gm);
  return r;
}

// ---------------------------------------------------------------------------
// Output-point selection over recorded ||G_eta|| values.

enum class SelectRule { kArgmin, kUniformRandom };

// argmin returns the earliest index attaining the minimum.
inline int select_output(const std::vector<double>& grad_map_norms,
                         SelectRule rule, RngStream* rng = nullptr) {
  if (grad_map_norms.empty())
    throw std::invalid_argument("select_output: empty trace");
  if (rule == SelectRule::kUniformRandom) {
    if (!rng) throw std::invalid_argument("select_output: uniform-random needs rng");
    return rng->uniform_int(static_cast<int>(grad_map_norms.size()));
  }
  int best = 0;
  for (std::size_t t = 1; t < grad_map_norms.size(); ++t)
    if (grad_map_norms[t] < grad_map_norms[best]) best = static_cast<int>(t);
  return best;
}

// V_lambda(w, u) = lambda [Psi_0(w) - Psi_0*] + Psi_0(w) - L(w, u), >= 0.
// Requires the oracle Psi_0 (exact_Phi0 + exact Psi_0* from the benchmark).
inline double potential_diag(const ProblemNC& prob, const DenseVec& w,
                             const DenseVec& u, double lambda) {
  if (!prob.exact_Phi0) throw std::runtime_error("potential_diag: no oracle");
  const double psi0 = psi0_oracle(prob, w);
  const double gap = psi0 - prob.constants.Psi0_lower_bound;
  return lambda * gap + psi0 - lagrangian(prob, w, u);
}

}  // namespace minimax
