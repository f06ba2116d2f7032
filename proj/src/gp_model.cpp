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

#include "bssanova/gp_model.hpp"

#include "bssanova/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace bssanova {

using nlohmann::json;

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw invalid_argument("percentile of an empty set");
  if (!(q >= 0.0 && q <= 100.0)) throw invalid_argument("percentile must lie in [0, 100]");
  std::sort(values.begin(), values.end());
  const double pos = q / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

std::vector<std::size_t> evenly_spaced(std::size_t available, std::size_t count) {
  if (count == 0 || count > available) {
    throw invalid_argument("cannot pick " + std::to_string(count) + " of " +
                           std::to_string(available) + " draws");
  }
  std::vector<std::size_t> idx(count);
  for (std::size_t j = 0; j < count; ++j) idx[j] = j * available / count;
  return idx;
}

GPModel::GPModel(SelectedModel selected) : selected_(std::move(selected)) {
  check_ready();
  basis_ = basis_for(selected_.basis);
}

void GPModel::check_ready() const {
  const auto& s = selected_;
  if (s.terms.size() == 0) throw invalid_argument("model has no terms");
  if (s.posterior.n_terms() != s.terms.size()) {
    throw invalid_argument("coefficient count does not match the term matrix");
  }
  s.bounds.validate();
  if (s.bounds.size() != s.terms.n_inputs()) {
    throw invalid_argument("normalization bounds do not match the input count");
  }
  if (static_cast<int>(s.basis.n_basis) < s.terms.max_order()) {
    throw invalid_argument("basis descriptor is smaller than the highest term order");
  }
  if (s.posterior.has_draws() &&
      static_cast<std::size_t>(s.posterior.beta_draws.cols()) != s.terms.size()) {
    throw invalid_argument("coefficient draws do not match the term matrix");
  }
}

Eigen::MatrixXd GPModel::design(const Eigen::MatrixXd& raw_inputs) const {
  if (static_cast<std::size_t>(raw_inputs.cols()) != n_inputs()) {
    throw invalid_argument("model expects " + std::to_string(n_inputs()) + " inputs, got " +
                           std::to_string(raw_inputs.cols()));
  }
  const Eigen::MatrixXd unit = normalize_inputs(raw_inputs, selected_.bounds);
  return build_design_columns(unit, selected_.terms.rows(), basis_);
}

void GPModel::design_row(std::span<const double> raw_input, std::span<double> out) const {
  if (raw_input.size() != n_inputs()) {
    throw invalid_argument("model expects " + std::to_string(n_inputs()) + " inputs, got " +
                           std::to_string(raw_input.size()));
  }
  double unit[16];
  std::vector<double> heap;
  double* u = unit;
  if (raw_input.size() > 16) {
    heap.resize(raw_input.size());
    u = heap.data();
  }
  const auto& b = selected_.bounds;
  for (std::size_t i = 0; i < raw_input.size(); ++i) {
    if (!std::isfinite(raw_input[i])) throw data_error("non-finite value in inputs");
    u[i] = std::clamp((raw_input[i] - b.lower[i]) / (b.upper[i] - b.lower[i]), 0.0, 1.0);
  }
  build_design_row(std::span<const double>(u, raw_input.size()), selected_.terms.rows(), basis_,
                   out);
}

Eigen::VectorXd GPModel::predict_mean(const Eigen::MatrixXd& raw_inputs) const {
  return design(raw_inputs) * selected_.posterior.beta_mean;
}

Eigen::VectorXd GPModel::predict_with(const Eigen::MatrixXd& raw_inputs,
                                      const Eigen::VectorXd& beta) const {
  if (static_cast<std::size_t>(beta.size()) != n_terms()) {
    throw invalid_argument("coefficient vector has the wrong length");
  }
  return design(raw_inputs) * beta;
}

PredictionBand GPModel::predict_draws(const Eigen::MatrixXd& raw_inputs,
                                      std::size_t n_curves) const {
  if (!has_draws()) throw capability_error("model was saved without coefficient draws");
  const auto picks = evenly_spaced(n_draws(), n_curves);
  const Eigen::MatrixXd x = design(raw_inputs);

  PredictionBand band;
  band.curves.resize(x.rows(), static_cast<Eigen::Index>(n_curves));
  for (std::size_t c = 0; c < n_curves; ++c) {
    band.curves.col(static_cast<Eigen::Index>(c)) =
        x * selected_.posterior.beta_draws.row(static_cast<Eigen::Index>(picks[c])).transpose();
  }
  band.lower.resize(x.rows());
  band.upper.resize(x.rows());
  std::vector<double> row(n_curves);
  for (Eigen::Index e = 0; e < x.rows(); ++e) {
    for (std::size_t c = 0; c < n_curves; ++c) row[c] = band.curves(e, static_cast<Eigen::Index>(c));
    band.lower(e) = percentile(row, 2.5);
    band.upper(e) = percentile(row, 97.5);
  }
  return band;
}

namespace {

json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vector_from(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json hyper_json(const Hyperparameters& h) {
  return {{"a", h.a},           {"b", h.b},
          {"a_tau", h.a_tau},   {"b_tau", h.b_tau},
          {"n_draws", h.n_draws}, {"burn_in", h.burn_in},
          {"seed", h.seed}};
}

Hyperparameters hyper_from(const json& j) {
  Hyperparameters h;
  h.a = j.at("a").get<double>();
  h.b = j.at("b").get<double>();
  h.a_tau = j.at("a_tau").get<double>();
  h.b_tau = j.at("b_tau").get<double>();
  h.n_draws = j.at("n_draws").get<int>();
  h.burn_in = j.at("burn_in").get<int>();
  h.seed = j.at("seed").get<std::uint64_t>();
  return h;
}

}  // namespace

std::string GPModel::to_json(bool with_draws) const {
  const auto& s = selected_;
  const auto& post = s.posterior;
  json j;
  j["format"] = "bssanova-model";
  j["version"] = kModelFormatVersion;
  j["n_inputs"] = n_inputs();
  j["input_names"] = input_names;
  j["target_name"] = target_name;
  j["bounds"] = {{"lower", s.bounds.lower}, {"upper", s.bounds.upper}};
  j["basis"] = {{"grid_size", s.basis.grid_size},
                {"n_basis", s.basis.n_basis},
                {"kernel_tag", s.basis.kernel_tag}};
  j["terms"] = s.terms.rows();
  j["beta_mean"] = vector_json(post.beta_mean);
  j["criterion"] = {{"kind", to_string(post.criterion.kind)}, {"value", post.criterion.value}};
  j["sigma2_draws"] = post.sigma2_draws;
  j["tau2_draws"] = post.tau2_draws;
  j["selection"] = {{"tolerance", s.config.tolerance},
                    {"criterion", to_string(s.config.criterion)},
                    {"max_interaction_order", s.config.max_interaction_order},
                    {"max_stage", s.config.max_stage},
                    {"basis_ceiling", s.config.basis_ceiling},
                    {"grid_size", s.config.grid_size},
                    {"hyperparameters", hyper_json(s.config.hyper)}};
  if (with_draws && post.has_draws()) {
    json draws = json::array();
    for (Eigen::Index r = 0; r < post.beta_draws.rows(); ++r) {
      draws.push_back(vector_json(post.beta_draws.row(r).transpose()));
    }
    j["beta_draws"] = std::move(draws);
  }
  return j.dump();
}

GPModel GPModel::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw io_error(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "bssanova-model") {
      throw io_error("not a bssanova model file");
    }
    const int version = j.at("version").get<int>();
    if (version != kModelFormatVersion) {
      throw io_error("model file version " + std::to_string(version) + " is not supported (expected " +
                     std::to_string(kModelFormatVersion) + ")");
    }
    SelectedModel s;
    s.bounds.lower = j.at("bounds").at("lower").get<std::vector<double>>();
    s.bounds.upper = j.at("bounds").at("upper").get<std::vector<double>>();
    s.basis.grid_size = j.at("basis").at("grid_size").get<std::size_t>();
    s.basis.n_basis = j.at("basis").at("n_basis").get<std::size_t>();
    s.basis.kernel_tag = j.at("basis").at("kernel_tag").get<std::string>();

    const auto rows = j.at("terms").get<std::vector<TermRow>>();
    const auto n_inputs = j.at("n_inputs").get<std::size_t>();
    if (rows.empty() || rows.front() != TermRow(n_inputs, 0)) {
      throw io_error("model term matrix must start with the intercept row");
    }
    s.terms = TermMatrix(n_inputs);
    s.terms.append(std::span<const TermRow>(rows).subspan(1), static_cast<int>(n_inputs));

    s.posterior.beta_mean = vector_from(j.at("beta_mean"));
    s.posterior.criterion.kind = criterion_from_string(j.at("criterion").at("kind").get<std::string>());
    s.posterior.criterion.value = j.at("criterion").at("value").get<double>();
    s.posterior.sigma2_draws = j.at("sigma2_draws").get<std::vector<double>>();
    s.posterior.tau2_draws = j.at("tau2_draws").get<std::vector<double>>();
    if (j.contains("beta_draws")) {
      const auto& draws = j.at("beta_draws");
      s.posterior.beta_draws.resize(static_cast<Eigen::Index>(draws.size()),
                                    s.posterior.beta_mean.size());
      for (std::size_t r = 0; r < draws.size(); ++r) {
        const Eigen::VectorXd row = vector_from(draws[r]);
        if (row.size() != s.posterior.beta_mean.size()) throw io_error("ragged beta_draws");
        s.posterior.beta_draws.row(static_cast<Eigen::Index>(r)) = row.transpose();
      }
    }

    const auto& sel = j.at("selection");
    s.config.tolerance = sel.at("tolerance").get<int>();
    s.config.criterion = criterion_from_string(sel.at("criterion").get<std::string>());
    s.config.max_interaction_order = sel.at("max_interaction_order").get<int>();
    s.config.max_stage = sel.at("max_stage").get<int>();
    s.config.basis_ceiling = sel.at("basis_ceiling").get<std::size_t>();
    s.config.grid_size = sel.at("grid_size").get<std::size_t>();
    s.config.hyper = hyper_from(sel.at("hyperparameters"));

    GPModel model(std::move(s));
    model.input_names = j.at("input_names").get<std::vector<std::string>>();
    model.target_name = j.at("target_name").get<std::string>();
    return model;
  } catch (const json::exception& e) {
    throw io_error(std::string("malformed model file: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Io) throw;
    throw io_error(std::string("inconsistent model file: ") + e.what());
  }
}

void GPModel::save(const std::filesystem::path& path, bool with_draws) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw io_error("cannot write model file: " + path.string());
  out << to_json(with_draws) << '\n';
  if (!out) throw io_error("failed writing model file: " + path.string());
}

GPModel GPModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open model file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

}  // namespace bssanova
