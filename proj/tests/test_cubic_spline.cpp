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

#include "bssanova/cubic_spline.hpp"
#include "bssanova/errors.hpp"

#include <cmath>
#include <vector>

#include "doctest.h"

using bssanova::CubicSpline;

TEST_CASE("natural spline reproduces straight lines exactly") {
  std::vector<double> v(11);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 2.0 + 3.0 * double(i) / 10.0;
  const CubicSpline s(0.0, 1.0, v);
  for (double x : {0.0, 0.05, 0.31, 0.5, 0.999, 1.0}) CHECK(s(x) == doctest::Approx(2.0 + 3.0 * x).epsilon(1e-14));
  for (double c : s.curvatures()) CHECK(std::abs(c) < 1e-12);
}

TEST_CASE("knots are interpolated exactly and ends are clamped") {
  std::vector<double> v(21);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::sin(7.0 * double(i) / 20.0);
  const CubicSpline s(0.0, 1.0, v);
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(s(s.knot(i)) == v[i]);
  CHECK(s.knot(20) == 1.0);
  CHECK(s(-1.0) == v.front());
  CHECK(s(2.0) == v.back());
  CHECK(s.curvatures().front() == 0.0);
  CHECK(s.curvatures().back() == 0.0);
}

TEST_CASE("interpolation error shrinks at fourth order in the interior") {
  const auto err = [](std::size_t n) {
    std::vector<double> v(n + 1);
    for (std::size_t i = 0; i <= n; ++i) v[i] = std::sin(3.0 * double(i) / double(n));
    const CubicSpline s(0.0, 1.0, v);
    double e = 0.0;
    for (int j = 0; j < 200; ++j) {
      const double x = 0.25 + 0.5 * (j + 0.5) / 200.0;
      e = std::max(e, std::abs(s(x) - std::sin(3.0 * x)));
    }
    return e;
  };
  const double ratio = err(20) / err(40);
  CHECK(ratio > 10.0);
}

TEST_CASE("from_parts rebuilds an identical spline") {
  std::vector<double> v{0.0, 1.0, 0.5, -0.25, 2.0};
  const CubicSpline a(0.0, 2.0, v);
  const CubicSpline b = CubicSpline::from_parts(0.0, 2.0, a.values(), a.curvatures());
  for (double x : {0.0, 0.3, 0.9, 1.5, 2.0}) CHECK(a(x) == b(x));
}
