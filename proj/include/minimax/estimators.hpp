// Permutation sampling and the shuffling estimators: the per-inner-iteration
// F estimator (Option 1), the frozen epoch estimator (Option 2), and the
// hyper-gradient assembly for both settings.
//
// Option 1 is maintained incrementally through prefix/suffix sums (O(m) per
// inner step), matching the stated cost of 2n function evaluations per epoch.
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "minimax/linalg.hpp"
#include "minimax/problem.hpp"
#include "minimax/prox.hpp"
#include "minimax/rng.hpp"

namespace minimax {

enum class PermutationMode {
  kIdentity,
  kFixedGiven,
  kRandomIndependent,
  kRandomShared,
};

inline PermutationMode permutation_mode_from_string(const std::string& s) {
  if (s == "identity") return PermutationMode::kIdentity;
  if (s == "fixed-given") return PermutationMode::kFixedGiven;
  if (s == "random-independent") return PermutationMode::kRandomIndependent;
  if (s == "random-shared") return PermutationMode::kRandomShared;
  throw std::invalid_argument("unknown permutation mode: " + s);
}

// pi and pi_hat are bijections on {1..n} (1-based component indices).
struct PermutationPair {
  std::vector<int> pi;
  std::vector<int> pi_hat;
  PermutationMode mode = PermutationMode::kIdentity;
};

inline std::vector<int> identity_permutation(int n) {
  std::vector<int> p(n);
  for (int i = 0; i < n; ++i) p[i] = i + 1;
  return p;
}

inline std::vector<int> fisher_yates(int n, RngStream& rs) {
  std::vector<int> p = identity_permutation(n);
  for (int i = n - 1; i > 0; --i) {
    const int j = rs.uniform_int(i + 1);
    std::swap(p[i], p[j]);
  }
  return p;
}

// Random modes draw pi and pi_hat from the two given streams so fixing one
// never perturbs the other. For fixed-given, supply `given`.
inline PermutationPair sample_permutations(int n, PermutationMode mode,
                                           RngStream pi_stream,
                                           RngStream pi_hat_stream,
                                           const PermutationPair* given = nullptr) {
  if (n < 1) throw std::invalid_argument("sample_permutations: n < 1");
  PermutationPair out;
  out.mode = mode;
  switch (mode) {
    case PermutationMode::kIdentity:
      out.pi = identity_permutation(n);
      out.pi_hat = out.pi;
      break;
    case PermutationMode::kFixedGiven:
      if (!given || static_cast<int>(given->pi.size()) != n ||
          static_cast<int>(given->pi_hat.size()) != n)
        throw std::invalid_argument("sample_permutations: fixed-given needs perms");
      out.pi = given->pi;
      out.pi_hat = given->pi_hat;
      break;
    case PermutationMode::kRandomIndependent:
      out.pi = fisher_yates(n, pi_stream);
      out.pi_hat = fisher_yates(n, pi_hat_stream);
      break;
    case PermutationMode::kRandomShared:
      out.pi = fisher_yates(n, pi_stream);
      out.pi_hat = out.pi;
      break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Option 1 estimator state:
//   F_i^(t) = (1/n) [ sum_{j<=i} F_{pi(j)}(w_{j-1}) + sum_{j>i} F_{pi(j)}(w_0) ]

class Option1State {
 public:
  // evals_at_w0[j] = F_{pi(j+1)}(w_0), j = 0..n-1 (one full pass at epoch start)
  explicit Option1State(std::vector<DenseVec> evals_at_w0)
      : at_w0_(std::move(evals_at_w0)), n_(static_cast<int>(at_w0_.size())) {
    if (n_ < 1) throw std::invalid_argument("Option1State: empty epoch");
    const std::size_t m = at_w0_[0].size();
    prefix_.assign(m, 0.0);
    suffix_.assign(m, 0.0);
    for (const DenseVec& v : at_w0_) axpy_in(1.0, v, suffix_);
  }

  int n() const { return n_; }
  int index() const { return i_; }
  const DenseVec& prefix_sum() const { return prefix_; }
  const DenseVec& suffix_sum() const { return suffix_; }

  // current estimator (prefix + suffix)/n; at i = 0 this is F(w_0)
  DenseVec current() const {
    DenseVec est = prefix_;
    axpy_in(1.0, suffix_, est);
    return scaled(est, 1.0 / n_);
  }

  // advance to index i with new_eval = F_{pi(i)}(w_{i-1}); returns F_i^(t)
  DenseVec advance(const DenseVec& new_eval) {
    if (i_ >= n_) throw std::out_of_range("Option1State: advancing past i = n");
    axpy_in(1.0, new_eval, prefix_);
    axpy_in(-1.0, at_w0_[i_], suffix_);
    ++i_;
    return current();
  }

 private:
  std::vector<DenseVec> at_w0_;
  DenseVec prefix_, suffix_;
  int n_ = 0;
  int i_ = 0;
};

inline DenseVec estimate_F_option1(Option1State& state, const DenseVec& new_eval) {
  return state.advance(new_eval);
}

// Option 2: F_i^(t) = F(w_0) for every i, computed once per epoch.
inline DenseVec estimate_F_option2(const ProblemNL& prob, const DenseVec& w0) {
  return full_F(prob, w0);
}

// ---------------------------------------------------------------------------
// Hyper-gradient assembly.

// (NL): grad F_{pihat(i)}(w_prev)^T K u*_gamma(F_est), as one J^T-vector
// product; the full Jacobian is never formed.
inline DenseVec hyper_gradient_nl(const ProblemNL& prob, int i,
                                  const DenseVec& w_prev, const DenseVec& F_est,
                                  const SmoothingSpec& s) {
  prob.check_index(i);
  const DenseVec ku =
      prob.K.apply(smoothed_conjugate(F_est, prob.K, prob.h, s).u_star);
  return prob.eval_Jt_vec_i(i, w_prev, ku);
}

// (NC): grad_w H_{pihat(i)}(w_prev, u_tilde)
inline DenseVec hyper_gradient_nc(const ProblemNC& prob, int i,
                                  const DenseVec& w_prev,
                                  const DenseVec& u_tilde) {
  prob.check_index(i);
  return prob.eval_gradw_H_i(i, w_prev, u_tilde);
}

}  // namespace minimax
