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

#include "bssanova/kernel_basis.hpp"
#include "bssanova/errors.hpp"

#include "test_util.hpp"

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "doctest.h"

using namespace bssanova;

namespace {

// Kernel written out independently of the library, with a selectable sign
// on the stationary term.
double oracle_kernel(double s, double t, double sign) {
  const auto b1 = [](double x) { return x - 0.5; };
  const auto b2 = [](double x) { return x * x - x + 1.0 / 6.0; };
  const auto b4 = [](double x) { return x * x * x * x - 2 * x * x * x + x * x - 1.0 / 30.0; };
  return b1(s) * b1(t) + b2(s) * b2(t) + sign * b4(std::abs(s - t)) / 24.0;
}

Eigen::MatrixXd oracle_gram(std::size_t g, double sign) {
  Eigen::MatrixXd k(g, g);
  for (std::size_t i = 0; i < g; ++i) {
    for (std::size_t j = 0; j < g; ++j) {
      k(i, j) = oracle_kernel(double(i) / double(g - 1), double(j) / double(g - 1), sign);
    }
  }
  return k;
}

}  // namespace

TEST_CASE("bernoulli polynomials") {
  CHECK(bernoulli_poly(1, 0.5) == 0.0);
  CHECK(bernoulli_poly(2, 0.0) == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
  CHECK(bernoulli_poly(4, 0.0) == doctest::Approx(-1.0 / 30.0).epsilon(1e-15));
  CHECK(bernoulli_poly(4, 1.0) == doctest::Approx(-1.0 / 30.0).epsilon(1e-15));
  CHECK_THROWS_AS(bernoulli_poly(3, 0.2), Error);
  try {
    bernoulli_poly(0, 0.2);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidArgument);
  }
}

TEST_CASE("main-effect kernel values, symmetry and domain") {
  CHECK(main_effect_kernel(0.5, 0.5) == doctest::Approx(1.0 / 120.0).epsilon(1e-14));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const double s = u(rng), t = u(rng);
    CHECK(main_effect_kernel(s, t) == main_effect_kernel(t, s));
    CHECK(main_effect_kernel(s, t) == doctest::Approx(oracle_kernel(s, t, -1.0)).epsilon(1e-13));
  }
  try {
    main_effect_kernel(1.2, 0.3);
    FAIL("expected a domain error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Domain);
  }
  CHECK_THROWS_AS(main_effect_kernel(0.3, -0.01), Error);
}

TEST_CASE("Gram matrix is exactly symmetric and positive semidefinite") {
  const Eigen::MatrixXd k = gram_matrix(501);
  CHECK(k.rows() == 501);
  CHECK((k - k.transpose()).cwiseAbs().maxCoeff() == 0.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k, Eigen::EigenvaluesOnly);
  const double mn = es.eigenvalues().minCoeff();
  const double mx = es.eigenvalues().maxCoeff();
  CHECK(mn >= -1e-8 * mx);
}

TEST_CASE("the plus-sign kernel variant is indefinite") {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(oracle_gram(101, +1.0), Eigen::EigenvaluesOnly);
  CHECK(es.eigenvalues().minCoeff() < -1e-6 * es.eigenvalues().maxCoeff());
}

TEST_CASE("basis eigenvalues descend and reconstruct the Gram matrix") {
  const auto spectrum = KernelSpectrum::cached(501);
  const std::size_t n_pos = spectrum->positive_count;
  REQUIRE(n_pos >= 25);
  const BasisSet full = kl_decompose(n_pos);
  const auto& ev = full.eigenvalues();
  for (std::size_t k = 1; k < ev.size(); ++k) CHECK(ev[k] < ev[k - 1]);
  CHECK(ev.back() > 0.0);

  const Eigen::MatrixXd k = oracle_gram(501, -1.0);
  const auto& grid = full.grid();
  Eigen::MatrixXd phi(501, static_cast<Eigen::Index>(n_pos));
  for (std::size_t j = 0; j < n_pos; ++j) {
    for (std::size_t i = 0; i < 501; ++i) phi(i, j) = full.eval(j + 1, grid[i]);
  }
  const double full_err = (phi * phi.transpose() - k).norm() / k.norm();
  CHECK(full_err < 1e-6);

  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t m : {1, 2, 5, 10, 20, 40}) {
    const auto part = phi.leftCols(static_cast<Eigen::Index>(m));
    const double err = (part * part.transpose() - k).norm() / k.norm();
    CHECK(err < previous);
    previous = err;
    if (m == 10) CHECK(err < 0.05);
  }
}

TEST_CASE("unscaled eigenfunctions are orthonormal under the grid quadrature") {
  const BasisSet b = kl_decompose(12);
  const auto& grid = b.grid();
  const double g = double(grid.size());
  for (std::size_t j = 1; j <= 12; ++j) {
    for (std::size_t k = j; k <= 12; ++k) {
      double ip = 0.0;
      for (double x : grid) {
        ip += b.eval(j, x) * b.eval(k, x) / std::sqrt(b.eigenvalues()[j - 1] * b.eigenvalues()[k - 1]);
      }
      ip /= g;
      if (j == k) CHECK(ip == doctest::Approx(1.0).epsilon(1e-10));
      else CHECK(std::abs(ip) < 1e-8);
    }
  }
}

TEST_CASE("sign convention: largest-magnitude knot value is positive") {
  const BasisSet b = kl_decompose(20);
  for (std::size_t k = 1; k <= 20; ++k) {
    const auto& v = b.spline(k).values();
    std::size_t arg = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
      if (std::abs(v[i]) > std::abs(v[arg])) arg = i;
    }
    CHECK(v[arg] > 0.0);
  }
}

TEST_CASE("eval: exact at knots, clamped outside, checked index") {
  const BasisSet b = kl_decompose(5);
  const auto& grid = b.grid();
  for (std::size_t k = 1; k <= 5; ++k) {
    for (std::size_t i = 0; i < grid.size(); i += 37) {
      CHECK(b.eval(k, grid[i]) == b.spline(k).values()[i]);
    }
    CHECK(b.eval(k, 1.3) == b.eval(k, 1.0));
    CHECK(b.eval(k, -0.4) == b.eval(k, 0.0));
  }
  CHECK_THROWS_AS(b.eval(0, 0.5), Error);
  CHECK_THROWS_AS(b.eval(6, 0.5), Error);
}

TEST_CASE("spline midpoints agree with the Nystrom extension") {
  const BasisSet b = kl_decompose(10);
  const auto& grid = b.grid();
  const double g = double(grid.size());
  for (std::size_t k = 1; k <= 10; ++k) {
    const double lam = b.eigenvalues()[k - 1];
    for (std::size_t i = 0; i + 1 < grid.size(); i += 25) {
      const double x = 0.5 * (grid[i] + grid[i + 1]);
      // phi_k(x) = 1/(G lam) sum_i K(x, s_i) phi_k(s_i), phi = scaled / sqrt(lam)
      double acc = 0.0;
      for (std::size_t j = 0; j < grid.size(); ++j) {
        acc += oracle_kernel(x, grid[j], -1.0) * b.eval(k, grid[j]) / std::sqrt(lam);
      }
      const double nystrom = std::sqrt(lam) * acc / (g * lam);
      CHECK(std::abs(b.eval(k, x) - nystrom) < 1e-4);
    }
  }
}

TEST_CASE("determinism, extension and cache round trip") {
  const BasisSet a = kl_decompose(8);
  const BasisSet b = kl_decompose(8);
  CHECK(a.eigenvalues() == b.eigenvalues());
  for (std::size_t k = 1; k <= 8; ++k) {
    CHECK(a.spline(k).values() == b.spline(k).values());
    CHECK(a.spline(k).curvatures() == b.spline(k).curvatures());
  }
  const BasisSet c = a.extended(12);
  REQUIRE(c.size() == 12);
  const BasisSet d = kl_decompose(12);
  for (std::size_t k = 1; k <= 12; ++k) CHECK(c.spline(k).values() == d.spline(k).values());

  testutil::TempDir tmp("basis");
  a.save_cache(tmp / "b.bin");
  const BasisSet e = BasisSet::load_cache(tmp / "b.bin");
  CHECK(e.size() == 8);
  CHECK(e.eigenvalues() == a.eigenvalues());
  for (double x : {0.0, 0.123, 0.5, 0.77777, 1.0}) {
    for (std::size_t k = 1; k <= 8; ++k) CHECK(e.eval(k, x) == a.eval(k, x));
  }
  {
    std::ofstream bad(tmp / "bad.bin", std::ios::binary);
    bad << "not a cache";
  }
  try {
    BasisSet::load_cache(tmp / "bad.bin");
    FAIL("expected an i/o error");
  } catch (const Error& err) {
    CHECK(err.kind() == ErrorKind::Io);
  }
  // Truncated cache.
  const std::string bytes = testutil::slurp(tmp / "b.bin");
  {
    std::ofstream cut(tmp / "cut.bin", std::ios::binary);
    cut << bytes.substr(0, bytes.size() / 2);
  }
  CHECK_THROWS_AS(BasisSet::load_cache(tmp / "cut.bin"), Error);
}

TEST_CASE("kl_decompose argument checks") {
  // An empty basis backs intercept-only models.
  CHECK(kl_decompose(0).size() == 0);
  CHECK_THROWS_AS(kl_decompose(10, 1), Error);
  CHECK_THROWS_AS(kl_decompose(600, 501), Error);
  BasisDescriptor bad;
  bad.n_basis = 3;
  bad.kernel_tag = "other";
  CHECK_THROWS_AS(basis_for(bad), Error);
}
