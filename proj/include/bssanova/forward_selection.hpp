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

#include "bssanova/errors.hpp"
#include "bssanova/gibbs_sampler.hpp"
#include "bssanova/kernel_basis.hpp"
#include "bssanova/term_design.hpp"

#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace bssanova {

struct SelectionConfig {
  /// Consecutive substages without a new minimum before stopping.
  int tolerance = 3;
  CriterionKind criterion = CriterionKind::BIC;
  int max_interaction_order = 3;
  int max_stage = 10;
  std::size_t basis_ceiling = kDefaultBasisCeiling;
  std::size_t grid_size = kDefaultGridSize;
  Hyperparameters hyper;

  void validate() const;
};

struct TraceEntry {
  int stage = 0;              // 0 for the intercept-only start
  std::size_t substage = 0;   // running index, also the seed offset
  Multiset multiset;          // empty for the intercept-only start
  std::size_t n_terms = 0;
  double criterion = 0.0;
  double elapsed_minutes = 0.0;
  bool is_min = false;
};

struct SelectedModel {
  TermMatrix terms;
  Posterior posterior;
  NormalizationBounds bounds;
  BasisDescriptor basis;
  SelectionConfig config;
  std::vector<TraceEntry> trace;
};

/// Raised when a substage fit fails; carries the trace up to the failure.
class SelectionError : public Error {
 public:
  SelectionError(ErrorKind kind, const std::string& what, std::vector<TraceEntry> trace)
      : Error(kind, what), trace_(std::move(trace)) {}
  const std::vector<TraceEntry>& trace() const noexcept { return trace_; }

 private:
  std::vector<TraceEntry> trace_;
};

/// Staged forward selection: starting from the intercept, stage `ind` adds one
/// substage per composition of `ind`, each followed by a Gibbs fit. Stops
/// after `tolerance` consecutive substages without a new criterion minimum
/// and returns the best model seen.
///
/// `bounds` overrides the normalization computed from `raw_inputs`.
SelectedModel forward_select(const Eigen::MatrixXd& raw_inputs, const Eigen::VectorXd& z,
                             const SelectionConfig& cfg,
                             const std::optional<NormalizationBounds>& bounds = std::nullopt);

/// Columns: ind, substage, multiset, P, criterion, minutes, is_min.
void write_trace_csv(std::ostream& out, const std::vector<TraceEntry>& trace);

}  // namespace bssanova
