// Proximal operators, the l1-ball projection, and the smoothed conjugate
// phi_gamma(v) = max_u { <v, Ku> - h(u) - gamma*b(u) } with b(u) = 0.5||u - ubar||^2.
//
// The maximizer is computed from the stationarity condition
//   u*_gamma(v) = prox_{h/gamma}(ubar + K^T v / gamma),
// i.e. h.prox(ubar + K^Tv/gamma, 1/gamma). Note this differs from the form
// printed in the source material (prox_{h/gamma}(ubar - K^Tv)); the derived
// condition is what the grid-oracle tests confirm.
#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "minimax/linalg.hpp"

namespace minimax {

inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

// A convex function g with its prox map. Indicators signal membership through
// in_domain instead of sentinel floats, so evaluate() stays finite on dom(g).
struct ProxFn {
  std::function<double(const DenseVec&)> evaluate;          // value on dom(g)
  std::function<bool(const DenseVec&)> in_domain;           // indicator support
  std::function<DenseVec(const DenseVec&, double)> prox;    // (x, eta) -> prox_{eta g}(x)
  double strong_convexity = 0.0;   // mu >= 0
  double domain_bound = kUnbounded;  // sup{||u||: u in dom g}, or kUnbounded
  double lipschitz_const = kUnbounded;  // M_g, or kUnbounded when none declared
  bool is_zero = false;

  double operator()(const DenseVec& x) const { return evaluate(x); }
};

inline DenseVec prox_l2_squared(const DenseVec& x, double eta, double lambda) {
  if (eta <= 0.0) throw std::invalid_argument("prox_l2_squared: eta <= 0");
  if (lambda < 0.0) throw std::invalid_argument("prox_l2_squared: lambda < 0");
  return scaled(x, 1.0 / (1.0 + eta * lambda));
}

// Euclidean projection onto {u : ||u||_1 <= radius}, exact sort-based scheme.
inline DenseVec project_l1_ball(const DenseVec& v, double radius) {
  if (radius <= 0.0) throw std::invalid_argument("project_l1_ball: radius <= 0");
  double l1 = 0.0;
  for (double x : v) l1 += std::fabs(x);
  if (l1 <= radius) return v;
  // project |v| onto the simplex of size `radius`, then restore signs
  std::vector<double> mu(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) mu[i] = std::fabs(v[i]);
  std::sort(mu.begin(), mu.end(), std::greater<double>());
  double cssv = 0.0, theta = 0.0;
  int rho = 0;
  for (std::size_t j = 0; j < mu.size(); ++j) {
    cssv += mu[j];
    const double t = (cssv - radius) / static_cast<double>(j + 1);
    if (mu[j] - t > 0.0) {
      rho = static_cast<int>(j + 1);
      theta = t;
    }
  }
  (void)rho;
  DenseVec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double m = std::fabs(v[i]) - theta;
    out[i] = m > 0.0 ? (v[i] > 0.0 ? m : -m) : 0.0;
  }
  return out;
}

// ---- stock ProxFn instances -------------------------------------------------

inline ProxFn zero_fn() {
  ProxFn g;
  g.evaluate = [](const DenseVec&) { return 0.0; };
  g.in_domain = [](const DenseVec&) { return true; };
  g.prox = [](const DenseVec& x, double) { return x; };
  g.is_zero = true;
  g.lipschitz_const = 0.0;
  return g;
}

inline ProxFn l2_squared_fn(double lambda) {
  ProxFn g;
  g.evaluate = [lambda](const DenseVec& x) { return 0.5 * lambda * nrm2_sq(x); };
  g.in_domain = [](const DenseVec&) { return true; };
  g.prox = [lambda](const DenseVec& x, double eta) {
    return prox_l2_squared(x, eta, lambda);
  };
  g.strong_convexity = lambda;
  return g;
}

inline ProxFn l1_norm_fn(double weight) {
  ProxFn g;
  g.evaluate = [weight](const DenseVec& x) {
    double s = 0.0;
    for (double v : x) s += std::fabs(v);
    return weight * s;
  };
  g.in_domain = [](const DenseVec&) { return true; };
  g.prox = [weight](const DenseVec& x, double eta) {
    DenseVec out(x.size());
    const double t = eta * weight;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i] > t)
        out[i] = x[i] - t;
      else if (x[i] < -t)
        out[i] = x[i] + t;
      else
        out[i] = 0.0;
    }
    return out;
  };
  // Lipschitz in l2 over R^q would be weight*sqrt(q); recorded per instance by
  // callers that know q. Keep the per-coordinate weight here.
  g.lipschitz_const = weight;
  return g;
}

inline ProxFn l1_ball_indicator_fn(double radius) {
  ProxFn g;
  g.evaluate = [](const DenseVec&) { return 0.0; };
  g.in_domain = [radius](const DenseVec& x) {
    double s = 0.0;
    for (double v : x) s += std::fabs(v);
    return s <= radius + 1e-12;
  };
  g.prox = [radius](const DenseVec& x, double) {
    return project_l1_ball(x, radius);
  };
  g.domain_bound = radius;  // sup l2 norm over the l1 ball
  return g;
}

inline ProxFn box_indicator_fn(double lo, double hi) {
  if (lo > hi) throw std::invalid_argument("box_indicator_fn: lo > hi");
  ProxFn g;
  g.evaluate = [](const DenseVec&) { return 0.0; };
  g.in_domain = [lo, hi](const DenseVec& x) {
    for (double v : x)
      if (v < lo - 1e-12 || v > hi + 1e-12) return false;
    return true;
  };
  g.prox = [lo, hi](const DenseVec& x, double) {
    DenseVec out(x);
    for (double& v : out) v = std::min(hi, std::max(lo, v));
    return out;
  };
  return g;
}

// ---- smoothing --------------------------------------------------------------

struct SmoothingSpec {
  double gamma = 0.0;
  DenseVec anchor_u;      // ubar
  double b_sup = 0.0;     // B_{phi_0} = sup b(u) over dom h (0 when unused)
  double grad_b_sup = 0.0;  // D_b = sup ||grad b(u)|| over dom h

  double b(const DenseVec& u) const {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double d = u[i] - anchor_u[i];
      s += d * d;
    }
    return 0.5 * s;
  }
};

// SmoothingSpec for h = indicator of the l1 ball of given radius, ubar = 0:
// b_sup = r^2/2 (l2 norm over the l1 ball peaks at a vertex), D_b = r.
inline SmoothingSpec l1_ball_smoothing(int q, double gamma, double radius = 1.0) {
  SmoothingSpec s;
  s.gamma = gamma;
  s.anchor_u.assign(q, 0.0);
  s.b_sup = 0.5 * radius * radius;
  s.grad_b_sup = radius;
  return s;
}

struct ConjugateResult {
  double value = 0.0;  // phi_gamma(v)
  DenseVec u_star;
};

// phi_gamma(v) and its maximizer. Requires gamma > 0 or mu_h > 0.
inline ConjugateResult smoothed_conjugate(const DenseVec& v,
                                          const LinearOperator& K,
                                          const ProxFn& h,
                                          const SmoothingSpec& s) {
  if (static_cast<int>(v.size()) != K.rows)  // v pairs with Ku in the range of K
    throw std::invalid_argument("smoothed_conjugate: v has wrong dimension");
  if (s.gamma <= 0.0 && h.strong_convexity <= 0.0)
    throw std::invalid_argument("smoothed_conjugate: non-smooth conjugate");
  const DenseVec ktv = K.apply_transpose(v);
  DenseVec u;
  if (s.gamma > 0.0) {
    DenseVec arg = s.anchor_u;
    axpy_in(1.0 / s.gamma, ktv, arg);
    u = h.prox(arg, 1.0 / s.gamma);
  } else {
    // gamma = 0 with mu_h > 0: argmax <K^Tv,u> - h(u) as a large-eta prox limit
    const double eta = 1e12;
    u = h.prox(scaled(ktv, eta), eta);
  }
  ConjugateResult r;
  r.u_star = std::move(u);
  r.value = dot(v, K.apply(r.u_star)) - h.evaluate(r.u_star);
  if (s.gamma > 0.0) r.value -= s.gamma * s.b(r.u_star);
  return r;
}

// grad phi_gamma(v) = K u*_gamma(v); Lipschitz with ||K||^2/(mu_h + gamma).
inline DenseVec smoothed_conjugate_grad(const DenseVec& v,
                                        const LinearOperator& K,
                                        const ProxFn& h,
                                        const SmoothingSpec& s) {
  return K.apply(smoothed_conjugate(v, K, h, s).u_star);
}

}  // namespace minimax
