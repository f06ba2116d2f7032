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
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace bssanova {

/// One independently recorded run: T samples of d states and f forcing inputs.
struct Episode {
  std::string id;
  std::vector<double> t;
  Eigen::MatrixXd states;   // T x d
  Eigen::MatrixXd forcing;  // T x f (f may be 0)

  std::size_t length() const noexcept { return t.size(); }
  /// Sampling interval; requires at least two samples.
  double dt() const;
};

struct TimeSeriesData {
  std::vector<std::string> state_names;
  std::vector<std::string> forcing_names;
  std::vector<Episode> episodes;

  std::size_t n_states() const noexcept { return state_names.size(); }
  std::size_t n_forcing() const noexcept { return forcing_names.size(); }
  std::size_t total_samples() const noexcept;

  /// Strictly increasing, uniformly spaced time per episode, consistent
  /// widths and finite values. Throws a data error otherwise.
  void validate() const;
};

}  // namespace bssanova
