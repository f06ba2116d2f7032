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

#include "bssanova/forward_selection.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace bssanova {

inline constexpr int kModelFormatVersion = 1;

/// Curves drawn from the retained coefficient draws plus per-point empirical
/// 2.5% and 97.5% percentiles.
struct PredictionBand {
  Eigen::MatrixXd curves;  // M x n_curves
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

/// Linear-interpolated empirical percentile of `values` (q in [0, 100]).
double percentile(std::vector<double> values, double q);

/// Indices of `count` evenly spaced entries out of `available`.
std::vector<std::size_t> evenly_spaced(std::size_t available, std::size_t count);

/// A fitted model ready for prediction. Immutable; predictions are const and
/// thread-safe.
class GPModel {
 public:
  GPModel() = default;
  explicit GPModel(SelectedModel selected);

  const SelectedModel& selected() const noexcept { return selected_; }
  const BasisSet& basis() const noexcept { return basis_; }
  std::size_t n_inputs() const noexcept { return selected_.terms.n_inputs(); }
  std::size_t n_terms() const noexcept { return selected_.terms.size(); }
  bool has_draws() const noexcept { return selected_.posterior.has_draws(); }
  std::size_t n_draws() const noexcept {
    return static_cast<std::size_t>(selected_.posterior.beta_draws.rows());
  }

  std::vector<std::string> input_names;
  std::string target_name;

  /// Design matrix for raw (unnormalized) inputs; inputs outside the training
  /// bounds are clamped.
  Eigen::MatrixXd design(const Eigen::MatrixXd& raw_inputs) const;
  /// Design row for one raw instance.
  void design_row(std::span<const double> raw_input, std::span<double> out) const;

  Eigen::VectorXd predict_mean(const Eigen::MatrixXd& raw_inputs) const;
  Eigen::VectorXd predict_with(const Eigen::MatrixXd& raw_inputs, const Eigen::VectorXd& beta) const;
  PredictionBand predict_draws(const Eigen::MatrixXd& raw_inputs, std::size_t n_curves = 40) const;

  void save(const std::filesystem::path& path, bool with_draws = true) const;
  static GPModel load(const std::filesystem::path& path);

  std::string to_json(bool with_draws = true) const;
  static GPModel from_json(const std::string& text);

 private:
  void check_ready() const;

  SelectedModel selected_;
  BasisSet basis_;
};

}  // namespace bssanova
