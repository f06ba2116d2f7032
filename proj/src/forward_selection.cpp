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

#include "bssanova/forward_selection.hpp"

#include "bssanova/logging.hpp"

#include <algorithm>
#include <chrono>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace bssanova {

void SelectionConfig::validate() const {
  std::ostringstream problems;
  if (tolerance < 1) problems << " tolerance must be >= 1;";
  if (max_stage < 1) problems << " max_stage must be >= 1;";
  if (max_interaction_order < 1 || max_interaction_order > 3) {
    problems << " max_interaction_order must be 1, 2 or 3;";
  }
  if (basis_ceiling < 1) problems << " basis_ceiling must be >= 1;";
  if (grid_size < 2) problems << " grid_size must be >= 2;";
  const auto msg = problems.str();
  if (!msg.empty()) throw invalid_argument("invalid selection config:" + msg);
  hyper.validate();
}

SelectedModel forward_select(const Eigen::MatrixXd& raw_inputs, const Eigen::VectorXd& z,
                             const SelectionConfig& cfg,
                             const std::optional<NormalizationBounds>& bounds) {
  cfg.validate();
  if (raw_inputs.rows() != z.size()) throw invalid_argument("inputs and targets differ in length");
  if (raw_inputs.cols() < 1) throw invalid_argument("at least one input is required");
  if (raw_inputs.rows() < 10) log::warn("fewer than 10 instances for forward selection");
  if (!z.allFinite()) throw data_error("non-finite target value");

  const auto start = std::chrono::steady_clock::now();
  const auto minutes = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() / 60.0;
  };

  SelectedModel best;
  best.config = cfg;
  best.bounds = bounds ? *bounds : NormalizationBounds::from_data(raw_inputs);
  const Eigen::MatrixXd unit = normalize_inputs(raw_inputs, best.bounds);
  const auto n_inputs = static_cast<std::size_t>(raw_inputs.cols());

  BasisSet basis = kl_decompose(1, cfg.grid_size);
  TermMatrix terms(n_inputs);
  Eigen::MatrixXd x = Eigen::MatrixXd::Ones(raw_inputs.rows(), 1);
  std::vector<TraceEntry> trace;
  std::size_t substage = 0;

  const auto fit = [&](int stage, const Multiset& m) {
    Hyperparameters h = cfg.hyper;
    h.seed = cfg.hyper.seed + substage;
    Posterior post;
    try {
      post = gibbs_fit(x, z, h, cfg.criterion);
    } catch (const Error& e) {
      throw SelectionError(e.kind(),
                           std::string("substage ") + std::to_string(substage) + " (stage " +
                               std::to_string(stage) + ", multiset " + format_multiset(m) +
                               "): " + e.what(),
                           trace);
    }
    TraceEntry entry;
    entry.stage = stage;
    entry.substage = substage;
    entry.multiset = m;
    entry.n_terms = terms.size();
    entry.criterion = post.criterion.value;
    entry.elapsed_minutes = minutes();
    // Exact ties keep the smaller, earlier model.
    entry.is_min = trace.empty() || post.criterion.value < best.posterior.criterion.value;
    if (entry.is_min) {
      best.terms = terms;
      best.posterior = std::move(post);
    }
    log::info("stage " + std::to_string(stage) + " substage " + std::to_string(substage) + " [" +
              (m.empty() ? std::string("intercept") : format_multiset(m)) + "] P=" +
              std::to_string(entry.n_terms) + " criterion=" + std::to_string(entry.criterion) +
              (entry.is_min ? " (new minimum)" : ""));
    trace.push_back(std::move(entry));
    return trace.back().is_min;
  };

  fit(0, {});

  int count = 0;
  for (int ind = 1; ind <= cfg.max_stage && count < cfg.tolerance; ++ind) {
    for (const auto& m : integer_compositions(ind, cfg.max_interaction_order)) {
      if (count >= cfg.tolerance) break;
      if (m.size() > n_inputs) {
        log::debug("skipping multiset " + format_multiset(m) + ": more parts than inputs");
        continue;
      }
      const auto top = static_cast<std::size_t>(*std::max_element(m.begin(), m.end()));
      if (top > cfg.basis_ceiling) {
        log::debug("skipping multiset " + format_multiset(m) + ": above the basis ceiling");
        continue;
      }
      if (top > basis.size()) basis = basis.extended(top);

      const auto rows = term_rows(m, n_inputs);
      const Eigen::MatrixXd block = build_design_columns(unit, rows, basis);
      terms.append(rows, cfg.max_interaction_order);
      const Eigen::Index old_cols = x.cols();
      x.conservativeResize(Eigen::NoChange, old_cols + block.cols());
      x.rightCols(block.cols()) = block;

      ++substage;
      if (fit(ind, m)) {
        count = 0;
      } else {
        ++count;
      }
    }
  }

  best.basis = BasisDescriptor{cfg.grid_size,
                               static_cast<std::size_t>(std::max(1, best.terms.max_order())),
                               kKernelTag};
  best.trace = std::move(trace);
  return best;
}

void write_trace_csv(std::ostream& out, const std::vector<TraceEntry>& trace) {
  out << "ind,substage,multiset,P,criterion,minutes,is_min\n";
  const auto old_precision = out.precision();
  out << std::setprecision(17);
  for (const auto& e : trace) {
    out << e.stage << ',' << e.substage << ',' << (e.multiset.empty() ? "0" : format_multiset(e.multiset))
        << ',' << e.n_terms << ',' << e.criterion << ',' << e.elapsed_minutes << ','
        << (e.is_min ? 1 : 0) << '\n';
  }
  out.precision(old_precision);
}

}  // namespace bssanova
