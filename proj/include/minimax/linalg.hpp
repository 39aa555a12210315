// Dense/sparse vector kernels and a matrix-free linear operator.
//
// Reductions use a fixed ascending-index accumulation order: reproducibility
// of solver traces takes precedence over SIMD-friendly reordering.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "minimax/rng.hpp"

namespace minimax {

using DenseVec = std::vector<double>;

inline void check_same_dim(const DenseVec& a, const DenseVec& b,
                           const char* where) {
  if (a.size() != b.size())
    throw std::invalid_argument(std::string(where) + ": dimension mismatch");
}

inline double dot(const DenseVec& a, const DenseVec& b) {
  check_same_dim(a, b, "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// returns y + alpha*x
inline DenseVec axpy(double alpha, const DenseVec& x, const DenseVec& y) {
  check_same_dim(x, y, "axpy");
  DenseVec out(y);
  for (std::size_t i = 0; i < x.size(); ++i) out[i] += alpha * x[i];
  return out;
}

// y += alpha*x in place (solver hot loops)
inline void axpy_in(double alpha, const DenseVec& x, DenseVec& y) {
  check_same_dim(x, y, "axpy_in");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline DenseVec scaled(const DenseVec& x, double alpha) {
  DenseVec out(x);
  for (double& v : out) v *= alpha;
  return out;
}

inline DenseVec sub(const DenseVec& a, const DenseVec& b) {
  check_same_dim(a, b, "sub");
  DenseVec out(a);
  for (std::size_t i = 0; i < b.size(); ++i) out[i] -= b[i];
  return out;
}

inline DenseVec add(const DenseVec& a, const DenseVec& b) {
  check_same_dim(a, b, "add");
  DenseVec out(a);
  for (std::size_t i = 0; i < b.size(); ++i) out[i] += b[i];
  return out;
}

inline double nrm2_sq(const DenseVec& x) { return dot(x, x); }
inline double nrm2(const DenseVec& x) { return std::sqrt(dot(x, x)); }

inline bool all_finite(const DenseVec& x) {
  for (double v : x)
    if (!std::isfinite(v)) return false;
  return true;
}

// ---------------------------------------------------------------------------
// SparseRow: one sample a_i with strictly increasing indices.

struct SparseRow {
  std::vector<int> indices;   // strictly increasing, 0-based
  std::vector<double> values; // same length
  int dim = 0;

  void validate() const {
    if (indices.size() != values.size())
      throw std::invalid_argument("SparseRow: index/value length mismatch");
    int prev = -1;
    for (std::size_t k = 0; k < indices.size(); ++k) {
      if (indices[k] <= prev || indices[k] >= dim)
        throw std::invalid_argument("SparseRow: bad index sequence");
      if (!std::isfinite(values[k]))
        throw std::invalid_argument("SparseRow: non-finite value");
      prev = indices[k];
    }
  }

  double norm() const {
    double s = 0.0;
    for (double v : values) s += v * v;
    return std::sqrt(s);
  }
};

inline double sparse_dot(const SparseRow& r, const DenseVec& w) {
  if (r.dim != static_cast<int>(w.size()))
    throw std::invalid_argument("sparse_dot: dimension mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < r.indices.size(); ++k)
    s += r.values[k] * w[r.indices[k]];
  return s;
}

// out += coeff * a_i (scatter)
inline void add_scaled_sparse(double coeff, const SparseRow& r, DenseVec& out) {
  if (r.dim != static_cast<int>(out.size()))
    throw std::invalid_argument("add_scaled_sparse: dimension mismatch");
  for (std::size_t k = 0; k < r.indices.size(); ++k)
    out[r.indices[k]] += coeff * r.values[k];
}

// ---------------------------------------------------------------------------
// Small dense matrices (row-major) for the oracle benchmarks. Not a BLAS.

struct DenseMat {
  int rows = 0, cols = 0;
  std::vector<double> a;  // rows*cols, row-major

  DenseMat() = default;
  DenseMat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}

  double& at(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
  double at(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }

  DenseVec apply(const DenseVec& x) const {
    if (static_cast<int>(x.size()) != cols)
      throw std::invalid_argument("DenseMat::apply: dimension mismatch");
    DenseVec y(rows, 0.0);
    for (int i = 0; i < rows; ++i) {
      double s = 0.0;
      for (int j = 0; j < cols; ++j) s += at(i, j) * x[j];
      y[i] = s;
    }
    return y;
  }

  DenseVec apply_transpose(const DenseVec& y) const {
    if (static_cast<int>(y.size()) != rows)
      throw std::invalid_argument("DenseMat::apply_transpose: dimension mismatch");
    DenseVec x(cols, 0.0);
    for (int j = 0; j < cols; ++j) {
      double s = 0.0;
      for (int i = 0; i < rows; ++i) s += at(i, j) * y[i];
      x[j] = s;
    }
    return x;
  }
};

inline DenseMat mat_add(const DenseMat& A, const DenseMat& B) {
  DenseMat C(A.rows, A.cols);
  for (std::size_t k = 0; k < C.a.size(); ++k) C.a[k] = A.a[k] + B.a[k];
  return C;
}

inline DenseMat mat_scale(const DenseMat& A, double c) {
  DenseMat C(A);
  for (double& v : C.a) v *= c;
  return C;
}

// Eigenvalues of a symmetric matrix via cyclic Jacobi rotations.
// Fine for the <=16-dimensional benchmark matrices used here.
inline std::vector<double> sym_eigenvalues(DenseMat A) {
  if (A.rows != A.cols) throw std::invalid_argument("sym_eigenvalues: not square");
  const int n = A.rows;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += A.at(i, j) * A.at(i, j);
    if (off < 1e-28) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = A.at(p, q);
        if (std::fabs(apq) < 1e-300) continue;
        const double app = A.at(p, p), aqq = A.at(q, q);
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = A.at(k, p), akq = A.at(k, q);
          A.at(k, p) = c * akp - s * akq;
          A.at(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = A.at(p, k), aqk = A.at(q, k);
          A.at(p, k) = c * apk - s * aqk;
          A.at(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(n);
  for (int i = 0; i < n; ++i) ev[i] = A.at(i, i);
  return ev;
}

// Spectral norm ||A||_2 = sqrt(lambda_max(A^T A)), exact via Jacobi.
inline double spectral_norm(const DenseMat& A) {
  DenseMat G(A.cols, A.cols);
  for (int i = 0; i < A.cols; ++i)
    for (int j = 0; j < A.cols; ++j) {
      double s = 0.0;
      for (int k = 0; k < A.rows; ++k) s += A.at(k, i) * A.at(k, j);
      G.at(i, j) = s;
    }
  double lam = 0.0;
  for (double e : sym_eigenvalues(G)) lam = std::max(lam, e);
  return std::sqrt(std::max(0.0, lam));
}

inline double min_eigenvalue_sym(const DenseMat& A) {
  double lam = std::numeric_limits<double>::infinity();
  for (double e : sym_eigenvalues(A)) lam = std::min(lam, e);
  return lam;
}

// Solve A x = b for small dense A by Gaussian elimination with partial pivoting.
inline DenseVec solve_dense(DenseMat A, DenseVec b) {
  if (A.rows != A.cols || A.rows != static_cast<int>(b.size()))
    throw std::invalid_argument("solve_dense: dimension mismatch");
  const int n = A.rows;
  for (int k = 0; k < n; ++k) {
    int piv = k;
    for (int i = k + 1; i < n; ++i)
      if (std::fabs(A.at(i, k)) > std::fabs(A.at(piv, k))) piv = i;
    if (std::fabs(A.at(piv, k)) < 1e-300)
      throw std::runtime_error("solve_dense: singular matrix");
    if (piv != k) {
      for (int j = 0; j < n; ++j) std::swap(A.at(k, j), A.at(piv, j));
      std::swap(b[k], b[piv]);
    }
    for (int i = k + 1; i < n; ++i) {
      const double m = A.at(i, k) / A.at(k, k);
      if (m == 0.0) continue;
      for (int j = k; j < n; ++j) A.at(i, j) -= m * A.at(k, j);
      b[i] -= m * b[k];
    }
  }
  DenseVec x(n, 0.0);
  for (int i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (int j = i + 1; j < n; ++j) s -= A.at(i, j) * x[j];
    x[i] = s / A.at(i, i);
  }
  return x;
}

// ---------------------------------------------------------------------------
// Matrix-free linear operator K with a certified norm upper bound.

struct LinearOperator {
  int rows = 0;  // q
  int cols = 0;  // m
  std::function<DenseVec(const DenseVec&)> apply;            // v -> Kv
  std::function<DenseVec(const DenseVec&)> apply_transpose;  // u -> K^T u
  double norm_bound = 0.0;  // upper bound on ||K||
};

inline LinearOperator identity_operator(int m) {
  LinearOperator K;
  K.rows = m;
  K.cols = m;
  K.apply = [](const DenseVec& v) { return v; };
  K.apply_transpose = [](const DenseVec& u) { return u; };
  K.norm_bound = 1.0;
  return K;
}

inline LinearOperator dense_operator(DenseMat M) {
  LinearOperator K;
  K.rows = M.rows;
  K.cols = M.cols;
  // Jacobi on M^T M is exact to machine precision for these small matrices;
  // the tiny inflation keeps norm_bound a true upper bound.
  K.norm_bound = spectral_norm(M) * (1.0 + 1e-12) + 1e-300;
  auto shared = std::make_shared<DenseMat>(std::move(M));
  K.apply = [shared](const DenseVec& v) { return shared->apply(v); };
  K.apply_transpose = [shared](const DenseVec& u) { return shared->apply_transpose(u); };
  return K;
}

}  // namespace minimax
