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
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace bssanova {

void NormalizationBounds::validate() const {
  if (lower.size() != upper.size()) throw invalid_argument("bounds arity mismatch");
  if (lower.empty()) throw invalid_argument("bounds are empty");
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (!std::isfinite(lower[i]) || !std::isfinite(upper[i])) {
      throw data_error("non-finite bound for input " + std::to_string(i));
    }
    if (!(upper[i] > lower[i])) {
      throw data_error("input " + std::to_string(i) + " is constant in the training data");
    }
  }
}

NormalizationBounds NormalizationBounds::from_data(const Eigen::MatrixXd& raw) {
  if (raw.rows() == 0 || raw.cols() == 0) throw invalid_argument("no data for bounds");
  if (!raw.allFinite()) throw data_error("non-finite value in inputs");
  NormalizationBounds b;
  for (Eigen::Index j = 0; j < raw.cols(); ++j) {
    b.lower.push_back(raw.col(j).minCoeff());
    b.upper.push_back(raw.col(j).maxCoeff());
  }
  b.validate();
  return b;
}

Eigen::MatrixXd normalize_inputs(const Eigen::MatrixXd& raw, const NormalizationBounds& bounds) {
  bounds.validate();
  if (static_cast<std::size_t>(raw.cols()) != bounds.size()) {
    throw invalid_argument("input has " + std::to_string(raw.cols()) + " columns, bounds have " +
                           std::to_string(bounds.size()));
  }
  if (!raw.allFinite()) throw data_error("non-finite value in inputs");
  Eigen::MatrixXd unit(raw.rows(), raw.cols());
  for (Eigen::Index j = 0; j < raw.cols(); ++j) {
    const double lo = bounds.lower[static_cast<std::size_t>(j)];
    const double span = bounds.upper[static_cast<std::size_t>(j)] - lo;
    for (Eigen::Index e = 0; e < raw.rows(); ++e) {
      unit(e, j) = std::clamp((raw(e, j) - lo) / span, 0.0, 1.0);
    }
  }
  return unit;
}

Eigen::MatrixXd denormalize_inputs(const Eigen::MatrixXd& unit, const NormalizationBounds& bounds) {
  bounds.validate();
  if (static_cast<std::size_t>(unit.cols()) != bounds.size()) {
    throw invalid_argument("column count does not match bounds");
  }
  Eigen::MatrixXd raw(unit.rows(), unit.cols());
  for (Eigen::Index j = 0; j < unit.cols(); ++j) {
    const double lo = bounds.lower[static_cast<std::size_t>(j)];
    const double span = bounds.upper[static_cast<std::size_t>(j)] - lo;
    raw.col(j) = (unit.col(j).array() * span + lo).matrix();
  }
  return raw;
}

std::string format_multiset(const Multiset& m) {
  std::string s;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (i) s += '+';
    s += std::to_string(m[i]);
  }
  return s;
}

namespace {

// Nonincreasing partitions of `remaining` with parts <= cap.
void partitions(int remaining, int cap, int parts_left, std::vector<int>& current,
                std::vector<std::vector<int>>& out) {
  if (remaining == 0) {
    out.push_back(current);
    return;
  }
  if (parts_left == 0) return;
  for (int part = std::min(cap, remaining); part >= 1; --part) {
    current.push_back(part);
    partitions(remaining - part, part, parts_left - 1, current, out);
    current.pop_back();
  }
}

}  // namespace

std::vector<Multiset> integer_compositions(int ind, int max_parts) {
  if (ind < 1) throw invalid_argument("composition index must be positive");
  if (max_parts < 1) throw invalid_argument("max_parts must be positive");
  std::vector<std::vector<int>> descending;
  std::vector<int> current;
  partitions(ind, ind, max_parts, current, descending);
  std::sort(descending.begin(), descending.end(),
            [](const std::vector<int>& a, const std::vector<int>& b) {
              if (a.front() != b.front()) return a.front() < b.front();
              return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
            });
  std::vector<Multiset> out;
  out.reserve(descending.size());
  for (auto& d : descending) out.emplace_back(d.rbegin(), d.rend());
  return out;
}

std::vector<TermRow> term_rows(const Multiset& multiset, std::size_t n_inputs) {
  const std::size_t k = multiset.size();
  if (k == 0) throw invalid_argument("empty multiset");
  if (k > n_inputs) return {};
  for (int v : multiset) {
    if (v < 1) throw invalid_argument("multiset parts must be positive");
  }
  Multiset values = multiset;
  std::sort(values.begin(), values.end());

  std::vector<TermRow> rows;
  std::vector<std::size_t> combo(k);
  for (std::size_t i = 0; i < k; ++i) combo[i] = i;
  while (true) {
    Multiset perm = values;
    do {
      TermRow row(n_inputs, 0);
      for (std::size_t i = 0; i < k; ++i) row[combo[i]] = perm[i];
      rows.push_back(std::move(row));
    } while (std::next_permutation(perm.begin(), perm.end()));

    // Next k-combination of {0..n-1} in lexicographic order.
    std::size_t i = k;
    while (i > 0 && combo[i - 1] == n_inputs - k + (i - 1)) --i;
    if (i == 0) break;
    ++combo[i - 1];
    for (std::size_t j = i; j < k; ++j) combo[j] = combo[j - 1] + 1;
  }
  return rows;
}

TermMatrix::TermMatrix(std::size_t n_inputs) : n_inputs_(n_inputs) {
  if (n_inputs == 0) throw invalid_argument("term matrix needs at least one input");
  rows_.emplace_back(n_inputs, 0);
}

void TermMatrix::append(std::span<const TermRow> rows, int max_interaction_order) {
  std::vector<TermRow> accepted;
  accepted.reserve(rows.size());
  for (const auto& row : rows) {
    if (row.size() != n_inputs_) throw invalid_argument("term row has wrong width");
    int nonzero = 0;
    for (int v : row) {
      if (v < 0) throw invalid_argument("negative basis order in term row");
      if (v > 0) ++nonzero;
    }
    if (nonzero == 0) throw invalid_argument("only row 0 may be the intercept");
    if (nonzero > max_interaction_order) {
      throw invalid_argument("term exceeds the maximum interaction order");
    }
    if (contains(row) || std::find(accepted.begin(), accepted.end(), row) != accepted.end()) {
      throw invalid_argument("duplicate term row");
    }
    accepted.push_back(row);
  }
  rows_.insert(rows_.end(), accepted.begin(), accepted.end());
}

int TermMatrix::max_order() const noexcept {
  int m = 0;
  for (const auto& row : rows_) {
    for (int v : row) m = std::max(m, v);
  }
  return m;
}

int TermMatrix::max_interaction() const noexcept {
  int m = 0;
  for (const auto& row : rows_) {
    m = std::max(m, static_cast<int>(std::count_if(row.begin(), row.end(),
                                                   [](int v) { return v > 0; })));
  }
  return m;
}

bool TermMatrix::contains(const TermRow& row) const {
  return std::find(rows_.begin(), rows_.end(), row) != rows_.end();
}

void TermMatrix::write_csv(std::ostream& out) const {
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << row[i];
    }
    out << '\n';
  }
}

TermMatrix TermMatrix::read_csv(std::istream& in) {
  std::vector<TermRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    TermRow row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        const int v = std::stoi(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
        row.push_back(v);
      } catch (const std::exception&) {
        throw data_error("term matrix line " + std::to_string(line_no) +
                         ": not an integer: '" + cell + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw data_error("term matrix is empty");
  TermMatrix m(rows.front().size());
  if (std::any_of(rows.front().begin(), rows.front().end(), [](int v) { return v != 0; })) {
    throw data_error("term matrix row 0 must be the intercept");
  }
  m.append(std::span<const TermRow>(rows).subspan(1), static_cast<int>(m.n_inputs()));
  return m;
}

Eigen::MatrixXd build_design_columns(const Eigen::MatrixXd& unit_inputs,
                                     std::span<const TermRow> rows, const BasisSet& basis) {
  const Eigen::Index n = unit_inputs.rows();
  const auto n_inputs = static_cast<std::size_t>(unit_inputs.cols());

  // Each (input, order) factor is evaluated once and shared by all terms using it.
  std::map<std::pair<std::size_t, int>, Eigen::VectorXd> factors;
  for (const auto& row : rows) {
    if (row.size() != n_inputs) throw invalid_argument("term row width does not match inputs");
    for (std::size_t i = 0; i < n_inputs; ++i) {
      const int order = row[i];
      if (order == 0) continue;
      if (order < 0 || static_cast<std::size_t>(order) > basis.size()) {
        throw invalid_argument("basis order " + std::to_string(order) +
                               " not available (basis has " + std::to_string(basis.size()) + ")");
      }
      auto key = std::make_pair(i, order);
      if (factors.count(key)) continue;
      Eigen::VectorXd f(n);
      const auto& spline = basis.spline(static_cast<std::size_t>(order));
      for (Eigen::Index e = 0; e < n; ++e) f(e) = spline(unit_inputs(e, static_cast<Eigen::Index>(i)));
      factors.emplace(key, std::move(f));
    }
  }

  Eigen::MatrixXd x(n, static_cast<Eigen::Index>(rows.size()));
  for (std::size_t j = 0; j < rows.size(); ++j) {
    auto col = x.col(static_cast<Eigen::Index>(j));
    col.setOnes();
    for (std::size_t i = 0; i < n_inputs; ++i) {
      if (rows[j][i] == 0) continue;
      col.array() *= factors.at({i, rows[j][i]}).array();
    }
  }
  return x;
}

void build_design_row(std::span<const double> unit_input, std::span<const TermRow> rows,
                      const BasisSet& basis, std::span<double> out) {
  if (out.size() != rows.size()) throw invalid_argument("design row buffer has wrong size");
  for (std::size_t j = 0; j < rows.size(); ++j) {
    const auto& row = rows[j];
    if (row.size() != unit_input.size()) {
      throw invalid_argument("term row width does not match inputs");
    }
    double v = 1.0;
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (row[i] != 0) v *= basis.eval(static_cast<std::size_t>(row[i]), unit_input[i]);
    }
    out[j] = v;
  }
}

}  // namespace bssanova
