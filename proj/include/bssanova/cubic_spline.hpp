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

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace bssanova {

/// Natural cubic spline through samples on a uniform grid over [lo, hi].
/// Evaluation outside the grid is clamped to the nearest end point.
class CubicSpline {
 public:
  CubicSpline() = default;
  CubicSpline(double lo, double hi, std::vector<double> values);

  double operator()(double x) const noexcept;

  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  std::size_t knot_count() const noexcept { return values_.size(); }
  double knot(std::size_t i) const noexcept;

  const std::vector<double>& values() const noexcept { return values_; }
  /// Second derivatives at the knots (zero at both ends).
  const std::vector<double>& curvatures() const noexcept { return curvatures_; }

  /// Rebuilds a spline from stored knot values and curvatures without refitting.
  static CubicSpline from_parts(double lo, double hi, std::vector<double> values,
                                std::vector<double> curvatures);

 private:
  double lo_ = 0.0;
  double hi_ = 1.0;
  double step_ = 1.0;
  double inv_step_ = 1.0;
  std::vector<double> values_;
  std::vector<double> curvatures_;
};

}  // namespace bssanova
