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

#include "bssanova/kernel_basis.hpp"

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace bssanova {

/// Per-input (min, max) from training data. Inputs are mapped onto [0,1]
/// with these bounds and clamped, so test points never extrapolate.
struct NormalizationBounds {
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t size() const noexcept { return lower.size(); }
  void validate() const;

  static NormalizationBounds from_data(const Eigen::MatrixXd& raw);
};

Eigen::MatrixXd normalize_inputs(const Eigen::MatrixXd& raw, const NormalizationBounds& bounds);
Eigen::MatrixXd denormalize_inputs(const Eigen::MatrixXd& unit, const NormalizationBounds& bounds);

/// Positive parts of one substage, sorted ascending, e.g. {1, 1, 2}.
using Multiset = std::vector<int>;

/// Basis order per input; 0 means the input does not appear in the term.
using TermRow = std::vector<int>;

std::string format_multiset(const Multiset& m);

/// Multisets of 1..max_parts positive integers summing to `ind`, lowest
/// maximum first; equal maxima ordered by their descending-sorted form.
std::vector<Multiset> integer_compositions(int ind, int max_parts);

/// Every distinct placement of a multiset onto `n_inputs` inputs: input
/// combinations in lexicographic order, and within a combination the distinct
/// value permutations in ascending order. Empty if the multiset has more parts
/// than there are inputs.
std::vector<TermRow> term_rows(const Multiset& multiset, std::size_t n_inputs);

/// Ordered term list. Row 0 is always the intercept.
class TermMatrix {
 public:
  TermMatrix() = default;
  explicit TermMatrix(std::size_t n_inputs);

  std::size_t n_inputs() const noexcept { return n_inputs_; }
  std::size_t size() const noexcept { return rows_.size(); }
  const std::vector<TermRow>& rows() const noexcept { return rows_; }
  const TermRow& operator[](std::size_t i) const { return rows_.at(i); }

  /// Appends rows, rejecting duplicates, wrong widths and rows above the
  /// interaction order.
  void append(std::span<const TermRow> rows, int max_interaction_order = 3);

  int max_order() const noexcept;
  int max_interaction() const noexcept;
  bool contains(const TermRow& row) const;

  void write_csv(std::ostream& out) const;
  static TermMatrix read_csv(std::istream& in);

  friend bool operator==(const TermMatrix&, const TermMatrix&) = default;

 private:
  std::size_t n_inputs_ = 0;
  std::vector<TermRow> rows_;
};

/// Entry (e, j) is the product over inputs of the scaled basis functions
/// named by rows[j], evaluated at instance e. All-zero rows give ones.
/// Inputs must already be normalized.
Eigen::MatrixXd build_design_columns(const Eigen::MatrixXd& unit_inputs,
                                     std::span<const TermRow> rows, const BasisSet& basis);

/// One design row for a single normalized instance.
void build_design_row(std::span<const double> unit_input, std::span<const TermRow> rows,
                      const BasisSet& basis, std::span<double> out);

}  // namespace bssanova
