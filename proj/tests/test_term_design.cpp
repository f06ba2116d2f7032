// Copyright 2026 The bssanova Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "bssanova/term_design.hpp"
#include "bssanova/errors.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"

using namespace bssanova;

namespace {

// Every sorted tuple of 1..max_parts parts in [1, ind] summing to ind,
// ordered by maximum, then by the descending-sorted tuple.
std::vector<Multiset> brute_compositions(int ind, int max_parts) {
  std::set<Multiset> found;
  std::function<void(Multiset&)> rec = [&](Multiset& cur) {
    const int sum = std::accumulate(cur.begin(), cur.end(), 0);
    if (sum == ind) {
      Multiset s = cur;
      std::sort(s.begin(), s.end());
      found.insert(s);
      return;
    }
    if (sum > ind || int(cur.size()) == max_parts) return;
    for (int v = 1; v <= ind; ++v) {
      cur.push_back(v);
      rec(cur);
      cur.pop_back();
    }
  };
  Multiset cur;
  rec(cur);
  std::vector<Multiset> out(found.begin(), found.end());
  std::sort(out.begin(), out.end(), [](const Multiset& a, const Multiset& b) {
    const int ma = *std::max_element(a.begin(), a.end());
    const int mb = *std::max_element(b.begin(), b.end());
    if (ma != mb) return ma < mb;
    Multiset da(a.rbegin(), a.rend()), db(b.rbegin(), b.rend());
    return da < db;
  });
  return out;
}

// Vectors in {0..ind}^n with at most three nonzero entries summing to ind.
std::size_t brute_row_count(int ind, std::size_t n) {
  std::size_t count = 0;
  std::vector<int> v(n, 0);
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == n) {
      const int sum = std::accumulate(v.begin(), v.end(), 0);
      const auto nz = std::count_if(v.begin(), v.end(), [](int x) { return x > 0; });
      if (sum == ind && nz <= 3) ++count;
      return;
    }
    for (int x = 0; x <= ind; ++x) {
      v[i] = x;
      rec(i + 1);
    }
  };
  rec(0);
  return count;
}

}  // namespace

TEST_CASE("normalization maps bounds to the unit box and clamps") {
  Eigen::MatrixXd raw(3, 2);
  raw << 1.0, -2.0, 3.0, 0.0, 2.0, 2.0;
  const auto b = NormalizationBounds::from_data(raw);
  CHECK(b.lower == std::vector<double>{1.0, -2.0});
  CHECK(b.upper == std::vector<double>{3.0, 2.0});
  const Eigen::MatrixXd u = normalize_inputs(raw, b);
  CHECK(u(0, 0) == 0.0);
  CHECK(u(1, 0) == 1.0);
  CHECK(u(0, 1) == 0.0);
  CHECK(u(2, 1) == 1.0);

  Eigen::MatrixXd out(1, 2);
  out << 3.0 + 0.5 * 2.0, -2.0 - 4.0;
  const Eigen::MatrixXd c = normalize_inputs(out, b);
  CHECK(c(0, 0) == 1.0);
  CHECK(c(0, 1) == 0.0);

  Eigen::MatrixXd interior(2, 2);
  interior << 1.7, 0.3, 2.9, -1.1;
  const Eigen::MatrixXd back = denormalize_inputs(normalize_inputs(interior, b), b);
  CHECK((back - interior).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("normalization rejects constant and non-finite inputs") {
  Eigen::MatrixXd raw(3, 2);
  raw << 1.0, 5.0, 2.0, 5.0, 3.0, 5.0;
  try {
    NormalizationBounds::from_data(raw);
    FAIL("expected a data error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Data);
  }
  Eigen::MatrixXd ok(2, 1);
  ok << 0.0, 1.0;
  const auto b = NormalizationBounds::from_data(ok);
  Eigen::MatrixXd bad(1, 1);
  bad << std::nan("");
  CHECK_THROWS_AS(normalize_inputs(bad, b), Error);
}

TEST_CASE("integer compositions follow the stated order") {
  CHECK(integer_compositions(1, 3) == std::vector<Multiset>{{1}});
  CHECK(integer_compositions(2, 3) == std::vector<Multiset>{{1, 1}, {2}});
  CHECK(integer_compositions(4, 3) == std::vector<Multiset>{{1, 1, 2}, {2, 2}, {1, 3}, {4}});
  CHECK(integer_compositions(3, 1) == std::vector<Multiset>{{3}});
  for (int ind = 1; ind <= 9; ++ind) {
    for (int parts = 1; parts <= 3; ++parts) {
      CHECK(integer_compositions(ind, parts) == brute_compositions(ind, parts));
    }
  }
  CHECK(format_multiset({1, 1, 2}) == "1+1+2");
}

TEST_CASE("term rows enumerate distinct placements") {
  CHECK(term_rows({1, 1}, 3) == std::vector<TermRow>{{1, 1, 0}, {1, 0, 1}, {0, 1, 1}});
  CHECK(term_rows({2}, 2) == std::vector<TermRow>{{2, 0}, {0, 2}});
  CHECK(term_rows({1, 2}, 2) == std::vector<TermRow>{{1, 2}, {2, 1}});
  CHECK(term_rows({1, 1, 1}, 2).empty());

  // Against all distinct permutations of the zero-buffered vector.
  for (const Multiset& m : {Multiset{1, 2, 3}, Multiset{1, 1, 2}, Multiset{2, 2}, Multiset{4}}) {
    for (std::size_t n = m.size(); n <= 4; ++n) {
      std::vector<int> v(n, 0);
      std::copy(m.begin(), m.end(), v.begin());
      std::sort(v.begin(), v.end());
      std::set<TermRow> oracle;
      do oracle.insert(v);
      while (std::next_permutation(v.begin(), v.end()));
      const auto rows = term_rows(m, n);
      CHECK(rows.size() == oracle.size());
      CHECK(std::set<TermRow>(rows.begin(), rows.end()) == oracle);
    }
  }
}

TEST_CASE("column count after each stage matches brute-force enumeration") {
  for (std::size_t n = 1; n <= 4; ++n) {
    std::size_t p = 1;
    std::size_t oracle = 1;
    for (int ind = 1; ind <= 5; ++ind) {
      for (const auto& m : integer_compositions(ind, 3)) p += term_rows(m, n).size();
      oracle += brute_row_count(ind, n);
      CHECK(p == oracle);
    }
  }
}

TEST_CASE("term matrix invariants and CSV round trip") {
  TermMatrix t(3);
  CHECK(t.size() == 1);
  CHECK(t[0] == TermRow{0, 0, 0});
  const auto rows = term_rows({1, 1}, 3);
  t.append(rows);
  CHECK(t.size() == 4);
  CHECK(t.contains({1, 0, 1}));
  CHECK_THROWS_AS(t.append(std::vector<TermRow>{{1, 1, 0}}), Error);
  CHECK_THROWS_AS(t.append(std::vector<TermRow>{{1, 0}}), Error);
  CHECK_THROWS_AS(t.append(std::vector<TermRow>{{0, 0, 0}}), Error);
  CHECK_THROWS_AS(t.append(std::vector<TermRow>{{1, 1, 1}}, 2), Error);
  t.append(std::vector<TermRow>{{3, 0, 0}});
  CHECK(t.max_order() == 3);
  CHECK(t.max_interaction() == 2);

  std::stringstream ss;
  t.write_csv(ss);
  const TermMatrix back = TermMatrix::read_csv(ss);
  CHECK(back == t);
}

TEST_CASE("design columns are products of basis evaluations") {
  const BasisSet basis = kl_decompose(4);
  Eigen::MatrixXd theta(2, 2);
  theta << 0.3, 0.9, 0.0, 1.0;
  const std::vector<TermRow> rows{{0, 0}, {1, 0}, {1, 2}, {0, 4}};
  const Eigen::MatrixXd x = build_design_columns(theta, rows, basis);
  REQUIRE(x.cols() == 4);
  CHECK(x(0, 0) == 1.0);
  CHECK(x(1, 0) == 1.0);
  CHECK(x(0, 1) == basis.eval(1, 0.3));
  CHECK(x(0, 2) == basis.eval(1, 0.3) * basis.eval(2, 0.9));
  CHECK(x(1, 3) == basis.eval(4, 1.0));
  CHECK_THROWS_AS(build_design_columns(theta, std::vector<TermRow>{{5, 0}}, basis), Error);
}

TEST_CASE("stage-by-stage concatenation equals a one-pass build") {
  const BasisSet basis = kl_decompose(6);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd theta(50, 3);
  for (Eigen::Index i = 0; i < theta.size(); ++i) theta.data()[i] = u(rng);

  TermMatrix terms(3);
  Eigen::MatrixXd concat = build_design_columns(theta, terms.rows(), basis);
  for (int ind = 1; ind <= 5; ++ind) {
    for (const auto& m : integer_compositions(ind, 3)) {
      const auto block_rows = term_rows(m, 3);
      terms.append(block_rows);
      const Eigen::MatrixXd block = build_design_columns(theta, block_rows, basis);
      Eigen::MatrixXd grown(concat.rows(), concat.cols() + block.cols());
      grown << concat, block;
      concat = grown;
    }
  }
  const Eigen::MatrixXd once = build_design_columns(theta, terms.rows(), basis);
  CHECK(once.cols() == concat.cols());
  CHECK((once - concat).cwiseAbs().maxCoeff() == 0.0);
  CHECK(once.allFinite());

  double bound = 0.0;
  for (std::size_t k = 1; k <= 6; ++k) {
    for (double v : basis.spline(k).values()) bound = std::max(bound, std::abs(v));
  }
  CHECK(once.cwiseAbs().maxCoeff() <= std::max(1.0, bound * bound * bound) + 1e-12);

  std::vector<double> row(terms.size());
  for (Eigen::Index e = 0; e < theta.rows(); ++e) {
    const Eigen::RowVectorXd r = theta.row(e);
    build_design_row({r.data(), 3}, terms.rows(), basis, row);
    for (std::size_t j = 0; j < row.size(); ++j) CHECK(row[j] == once(e, Eigen::Index(j)));
  }
}
