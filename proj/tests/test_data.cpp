#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>
#include <string>

#include "minimax/data.hpp"
#include "minimax/rng.hpp"

using namespace minimax;

namespace {

SparseDataset parse_str(const std::string& text, int declared_dim = 0) {
  std::istringstream in(text);
  return parse_libsvm(in, declared_dim);
}

}  // namespace

TEST_CASE("parse_libsvm basic line") {
  const SparseDataset ds = parse_str("+1 3:0.5 7:1.0\n");
  REQUIRE(ds.n == 1);
  CHECK(ds.p == 7);
  CHECK(ds.labels[0] == 1.0);
  CHECK(ds.rows[0].indices == std::vector<int>{2, 6});
  CHECK(ds.rows[0].values == std::vector<double>{0.5, 1.0});
}

TEST_CASE("parse_libsvm label conventions and formats") {
  const SparseDataset ds = parse_str(
      "-1 1:2.0\n"
      "0 2:1.0\n"       // 0 maps to -1
      "1 1:1 3:1\n"
      "+3.5 1:1\n"      // positive real maps to +1
      "\n"              // blank line skipped
      "# full comment line\n"
      "-1 2:4 # trailing comment\r\n");
  REQUIRE(ds.n == 5);
  CHECK(ds.labels == std::vector<double>{-1, -1, 1, 1, -1});
  CHECK(ds.p == 3);
}

TEST_CASE("parse_libsvm declared dimension override") {
  const SparseDataset ds = parse_str("+1 2:1\n", 10);
  CHECK(ds.p == 10);
  CHECK(ds.rows[0].dim == 10);
}

TEST_CASE("parse_libsvm errors carry line numbers") {
  CHECK_THROWS_AS(parse_str(""), ParseError);
  try {
    parse_str("+1 1:1\n+1 3:1 2:1\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line == 2);
  }
  CHECK_THROWS_AS(parse_str("abc 1:1\n"), ParseError);       // bad label
  CHECK_THROWS_AS(parse_str("+1 x:1\n"), ParseError);        // bad index
  CHECK_THROWS_AS(parse_str("+1 1:zz\n"), ParseError);       // bad value
  CHECK_THROWS_AS(parse_str("+1 0:1\n"), ParseError);        // idx must be >= 1
  CHECK_THROWS_AS(parse_str("+1 1:1 1:2\n"), ParseError);    // not increasing
  CHECK_THROWS_AS(parse_str("+1 11\n"), ParseError);         // missing colon
}

TEST_CASE("parser is total on fuzzed lines: error or parse, never crash") {
  RngStream s = Rng(99).stream("fuzz");
  const std::string alphabet = "+-0123456789.:aeE \t";
  for (int t = 0; t < 2000; ++t) {
    std::string line;
    const int len = s.uniform_int(30);
    for (int i = 0; i < len; ++i)
      line += alphabet[s.uniform_int(static_cast<int>(alphabet.size()))];
    line += '\n';
    try {
      (void)parse_str(line);
    } catch (const ParseError&) {
      // acceptable outcome
    }
  }
}

TEST_CASE("serialize/parse round trip is exact") {
  const SparseDataset ds = generate_synthetic(25, 6, 123, 0.1);
  std::ostringstream out;
  serialize_libsvm(ds, out);
  const SparseDataset back = parse_str(out.str());
  REQUIRE(back.n == ds.n);
  REQUIRE(back.p == ds.p);
  for (int i = 0; i < ds.n; ++i) {
    CHECK(back.labels[i] == ds.labels[i]);
    CHECK(back.rows[i].indices == ds.rows[i].indices);
    CHECK(back.rows[i].values == ds.rows[i].values);  // %.17g is lossless
  }
}

TEST_CASE("generate_synthetic labels and determinism") {
  const SparseDataset a = generate_synthetic(40, 5, 7, 0.2);
  const SparseDataset b = generate_synthetic(40, 5, 7, 0.2);
  REQUIRE(a.n == 40);
  for (int i = 0; i < a.n; ++i) {
    CHECK((a.labels[i] == 1.0 || a.labels[i] == -1.0));
    CHECK(a.labels[i] == b.labels[i]);
    CHECK(a.rows[i].values == b.rows[i].values);
  }
  const SparseDataset c = generate_synthetic(40, 5, 8, 0.2);
  bool any_diff = false;
  for (int i = 0; i < a.n && !any_diff; ++i)
    any_diff = a.rows[i].values != c.rows[i].values;
  CHECK(any_diff);
}

TEST_CASE("noise-free synthetic data is linearly separable (perceptron oracle)") {
  const SparseDataset ds = generate_synthetic(60, 4, 11, 0.0);
  DenseVec w(ds.p, 0.0);
  double bias = 0.0;
  bool converged = false;
  for (int pass = 0; pass < 2000 && !converged; ++pass) {
    int mistakes = 0;
    for (int i = 0; i < ds.n; ++i) {
      const double margin = ds.labels[i] * (sparse_dot(ds.rows[i], w) + bias);
      if (margin <= 0.0) {
        add_scaled_sparse(ds.labels[i], ds.rows[i], w);
        bias += ds.labels[i];
        ++mistakes;
      }
    }
    converged = mistakes == 0;
  }
  CHECK(converged);
}

TEST_CASE("partition_blocks basics") {
  CHECK_THROWS(partition_blocks(10, 32));
  CHECK_THROWS(partition_blocks(10, 0));
  const auto two = partition_blocks(10, 2);
  REQUIRE(two.size() == 2);
  CHECK(two[0] == std::make_pair(0, 5));
  CHECK(two[1] == std::make_pair(5, 10));
  // remainder rows go to the leading blocks
  const auto three = partition_blocks(10, 3);
  CHECK(three[0] == std::make_pair(0, 4));
  CHECK(three[1] == std::make_pair(4, 7));
  CHECK(three[2] == std::make_pair(7, 10));
}

TEST_CASE("partition covers every index exactly once") {
  for (int n : {7, 16, 100})
    for (int k = 1; k <= n; k += 3) {
      const auto blocks = partition_blocks(n, k);
      std::vector<int> seen(n, 0);
      for (const auto& [b0, b1] : blocks) {
        CHECK(b0 < b1);
        for (int i = b0; i < b1; ++i) ++seen[i];
      }
      for (int c : seen) CHECK(c == 1);
    }
}
