// LIBSVM-format ingestion, synthetic datasets, and block partitioning.
#pragma once

#include <cctype>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "minimax/linalg.hpp"
#include "minimax/rng.hpp"

namespace minimax {

struct SparseDataset {
  std::vector<SparseRow> rows;
  std::vector<double> labels;  // each -1 or +1
  int n = 0;
  int p = 0;
};

struct ParseError : std::runtime_error {
  int line;
  ParseError(int ln, const std::string& msg)
      : std::runtime_error("line " + std::to_string(ln) + ": " + msg), line(ln) {}
};

// Grammar per line: <label> (<idx>:<val>)*, idx 1-based strictly increasing.
// Labels are mapped to -1/+1 by sign; 0 maps to -1 (covers 0/1-labelled files).
// declared_dim > 0 overrides the max-index feature dimension (train/test
// consistency); CRLF is tolerated.
inline SparseDataset parse_libsvm(std::istream& in, int declared_dim = 0) {
  SparseDataset ds;
  std::string line;
  int lineno = 0;
  int max_idx = 0;  // 1-based
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    // strip comments and blank lines
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;  // blank
    double raw_label;
    try {
      std::size_t used = 0;
      raw_label = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ParseError(lineno, "unparseable label '" + tok + "'");
    }
    SparseRow row;
    int prev_idx = 0;
    while (ls >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos)
        throw ParseError(lineno, "expected idx:val, got '" + tok + "'");
      int idx;
      double val;
      try {
        std::size_t used = 0;
        idx = std::stoi(tok.substr(0, colon), &used);
        if (used != colon) throw std::invalid_argument("trailing");
        const std::string vs = tok.substr(colon + 1);
        val = std::stod(vs, &used);
        if (used != vs.size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw ParseError(lineno, "unparseable token '" + tok + "'");
      }
      if (idx <= prev_idx)
        throw ParseError(lineno, "indices not strictly increasing at '" + tok + "'");
      if (idx < 1) throw ParseError(lineno, "index must be >= 1");
      row.indices.push_back(idx - 1);  // store 0-based
      row.values.push_back(val);
      prev_idx = idx;
    }
    if (prev_idx > max_idx) max_idx = prev_idx;
    ds.rows.push_back(std::move(row));
    ds.labels.push_back(raw_label > 0.0 ? 1.0 : -1.0);
  }
  if (ds.rows.empty()) throw ParseError(0, "empty dataset");
  ds.n = static_cast<int>(ds.rows.size());
  ds.p = declared_dim > 0 ? declared_dim : max_idx;
  for (auto& r : ds.rows) {
    r.dim = ds.p;
    r.validate();
  }
  return ds;
}

inline void serialize_libsvm(const SparseDataset& ds, std::ostream& out) {
  char buf[64];
  for (int i = 0; i < ds.n; ++i) {
    out << (ds.labels[i] > 0 ? "+1" : "-1");
    const SparseRow& r = ds.rows[i];
    for (std::size_t k = 0; k < r.indices.size(); ++k) {
      std::snprintf(buf, sizeof buf, " %d:%.17g", r.indices[k] + 1, r.values[k]);
      out << buf;
    }
    out << '\n';
  }
}

// Gaussian features with a planted separator; margin_noise in [0,1) flips each
// label with that probability. margin_noise = 0 keeps the data separable with
// a positive margin (samples too close to the plane are re-drawn).
inline SparseDataset generate_synthetic(int n, int p, std::uint64_t seed,
                                        double margin_noise) {
  if (n < 1 || p < 1)
    throw std::invalid_argument("generate_synthetic: n, p must be >= 1");
  Rng rng(seed);
  RngStream sep = rng.stream("separator");
  RngStream feat = rng.stream("features");
  RngStream noise = rng.stream("labelnoise");
  DenseVec w_true(p);
  for (double& v : w_true) v = sep.normal();
  const double wn = nrm2(w_true);
  SparseDataset ds;
  ds.n = n;
  ds.p = p;
  for (int i = 0; i < n; ++i) {
    DenseVec a(p);
    double margin = 0.0;
    for (int attempt = 0; attempt < 100; ++attempt) {
      for (double& v : a) v = feat.normal();
      margin = dot(a, w_true) / wn;
      if (std::fabs(margin) >= 0.05) break;  // enforce a margin off the plane
    }
    double label = margin > 0.0 ? 1.0 : -1.0;
    if (margin_noise > 0.0 && noise.uniform() < margin_noise) label = -label;
    SparseRow row;
    row.dim = p;
    row.indices.resize(p);
    row.values = a;
    for (int j = 0; j < p; ++j) row.indices[j] = j;
    ds.rows.push_back(std::move(row));
    ds.labels.push_back(label);
  }
  return ds;
}

// k_b contiguous [begin, end) blocks; the first (n mod k_b) blocks take one
// extra row. Each block acts as one shuffling component.
inline std::vector<std::pair<int, int>> partition_blocks(int n, int k_b) {
  if (k_b < 1 || k_b > n)
    throw std::invalid_argument("partition_blocks: need 1 <= k_b <= n");
  std::vector<std::pair<int, int>> blocks;
  const int base = n / k_b;
  const int extra = n % k_b;
  int begin = 0;
  for (int b = 0; b < k_b; ++b) {
    const int len = base + (b < extra ? 1 : 0);
    blocks.emplace_back(begin, begin + len);
    begin += len;
  }
  return blocks;
}

inline std::vector<std::pair<int, int>> partition_blocks(const SparseDataset& ds,
                                                         int k_b) {
  return partition_blocks(ds.n, k_b);
}

}  // namespace minimax
