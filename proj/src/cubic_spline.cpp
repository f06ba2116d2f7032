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
#include <utility>

namespace bssanova {

CubicSpline::CubicSpline(double lo, double hi, std::vector<double> values)
    : lo_(lo), hi_(hi), values_(std::move(values)) {
  const std::size_t n = values_.size();
  if (n < 2) throw invalid_argument("cubic spline needs at least two knots");
  if (!(hi > lo)) throw invalid_argument("cubic spline needs hi > lo");
  step_ = (hi_ - lo_) / static_cast<double>(n - 1);
  inv_step_ = 1.0 / step_;

  // Tridiagonal system for interior curvatures; natural ends M_0 = M_{n-1} = 0.
  // Uniform spacing: M_{i-1} + 4 M_i + M_{i+1} = 6 (y_{i+1} - 2 y_i + y_{i-1}) / h^2.
  curvatures_.assign(n, 0.0);
  if (n == 2) return;
  const std::size_t m = n - 2;
  std::vector<double> diag(m, 4.0);
  std::vector<double> rhs(m);
  const double scale = 6.0 / (step_ * step_);
  for (std::size_t i = 0; i < m; ++i) {
    rhs[i] = scale * (values_[i + 2] - 2.0 * values_[i + 1] + values_[i]);
  }
  for (std::size_t i = 1; i < m; ++i) {
    const double w = 1.0 / diag[i - 1];
    diag[i] -= w;
    rhs[i] -= w * rhs[i - 1];
  }
  curvatures_[m] = rhs[m - 1] / diag[m - 1];
  for (std::size_t i = m - 1; i-- > 0;) {
    curvatures_[i + 1] = (rhs[i] - curvatures_[i + 2]) / diag[i];
  }
}

CubicSpline CubicSpline::from_parts(double lo, double hi, std::vector<double> values,
                                    std::vector<double> curvatures) {
  if (values.size() < 2 || values.size() != curvatures.size() || !(hi > lo)) {
    throw invalid_argument("inconsistent cubic spline parts");
  }
  CubicSpline s;
  s.lo_ = lo;
  s.hi_ = hi;
  s.step_ = (hi - lo) / static_cast<double>(values.size() - 1);
  s.inv_step_ = 1.0 / s.step_;
  s.values_ = std::move(values);
  s.curvatures_ = std::move(curvatures);
  return s;
}

double CubicSpline::knot(std::size_t i) const noexcept {
  if (i + 1 == values_.size()) return hi_;
  return lo_ + static_cast<double>(i) * step_;
}

double CubicSpline::operator()(double x) const noexcept {
  const std::size_t last = values_.size() - 1;
  if (!(x > lo_)) return values_.front();
  if (!(x < hi_)) return values_.back();

  const double u = (x - lo_) * inv_step_;
  std::size_t i = static_cast<std::size_t>(u);
  if (i >= last) i = last - 1;
  if (x == knot(i)) return values_[i];
  if (x == knot(i + 1)) return values_[i + 1];

  const double b = u - static_cast<double>(i);
  const double a = 1.0 - b;
  const double h2 = step_ * step_ / 6.0;
  return a * values_[i] + b * values_[i + 1] +
         ((a * a * a - a) * curvatures_[i] + (b * b * b - b) * curvatures_[i + 1]) * h2;
}

}  // namespace bssanova
