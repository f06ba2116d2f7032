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

#include "bssanova/sysid.hpp"

#include "bssanova/csv.hpp"
#include "bssanova/logging.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace bssanova {

using nlohmann::json;

DerivativeSamples estimate_derivatives(const TimeSeriesData& data) {
  data.validate();
  const auto d = static_cast<Eigen::Index>(data.n_states());
  const auto f = static_cast<Eigen::Index>(data.n_forcing());
  const auto total = static_cast<Eigen::Index>(data.total_samples());

  DerivativeSamples out;
  out.inputs.resize(total, d + f);
  out.targets.resize(total, d);
  out.episode.reserve(static_cast<std::size_t>(total));
  out.step.reserve(static_cast<std::size_t>(total));

  Eigen::Index row = 0;
  for (std::size_t e = 0; e < data.episodes.size(); ++e) {
    const auto& ep = data.episodes[e];
    const auto T = static_cast<Eigen::Index>(ep.length());
    if (T < 3) {
      throw data_error("episode '" + ep.id + "' needs at least 3 samples for differencing");
    }
    const double dt = ep.dt();
    for (Eigen::Index k = 0; k < T; ++k, ++row) {
      out.inputs.row(row).head(d) = ep.states.row(k);
      if (f > 0) out.inputs.row(row).tail(f) = ep.forcing.row(k);
      if (k == 0) {
        out.targets.row(row) = (ep.states.row(1) - ep.states.row(0)) / dt;
      } else if (k == T - 1) {
        out.targets.row(row) = (ep.states.row(T - 1) - ep.states.row(T - 2)) / dt;
      } else {
        out.targets.row(row) = (ep.states.row(k + 1) - ep.states.row(k - 1)) / (2.0 * dt);
      }
      out.episode.push_back(e);
      out.step.push_back(static_cast<std::size_t>(k));
    }
  }
  return out;
}

StateSpaceModel::StateSpaceModel(std::vector<GPModel> models, std::vector<std::string> state_names,
                                 std::vector<std::string> forcing_names, double dt)
    : models_(std::move(models)),
      state_names_(std::move(state_names)),
      forcing_names_(std::move(forcing_names)),
      dt_(dt) {
  if (models_.empty()) throw invalid_argument("state-space model needs at least one state");
  if (models_.size() != state_names_.size()) {
    throw invalid_argument("one model per state is required");
  }
  const std::size_t width = state_names_.size() + forcing_names_.size();
  for (const auto& m : models_) {
    if (m.n_inputs() != width) {
      throw invalid_argument("state model input dimension " + std::to_string(m.n_inputs()) +
                             " does not equal states + forcing = " + std::to_string(width));
    }
  }
}

std::vector<Eigen::VectorXd> StateSpaceModel::mean_coefficients() const {
  std::vector<Eigen::VectorXd> out;
  for (const auto& m : models_) out.push_back(m.selected().posterior.beta_mean);
  return out;
}

std::vector<Eigen::VectorXd> StateSpaceModel::draw_coefficients(std::size_t member,
                                                                std::size_t n_curves) const {
  if (member >= n_curves) throw invalid_argument("ensemble member out of range");
  std::vector<Eigen::VectorXd> out;
  for (const auto& m : models_) {
    if (!m.has_draws()) throw capability_error("state model has no retained coefficient draws");
    const auto picks = evenly_spaced(m.n_draws(), n_curves);
    out.push_back(m.selected().posterior.beta_draws.row(static_cast<Eigen::Index>(picks[member])).transpose());
  }
  return out;
}

void StateSpaceModel::derivative(std::span<const double> x, std::span<const double> u,
                                 std::span<const Eigen::VectorXd> coefficients,
                                 std::span<double> dx) const {
  const std::size_t d = n_states();
  if (x.size() != d || u.size() != n_forcing() || dx.size() != d || coefficients.size() != d) {
    throw invalid_argument("state/forcing dimension mismatch in derivative evaluation");
  }
  std::vector<double> input(d + n_forcing());
  std::copy(x.begin(), x.end(), input.begin());
  std::copy(u.begin(), u.end(), input.begin() + static_cast<std::ptrdiff_t>(d));
  for (std::size_t i = 0; i < d; ++i) {
    Eigen::VectorXd row(static_cast<Eigen::Index>(models_[i].n_terms()));
    models_[i].design_row(input, std::span<double>(row.data(), static_cast<std::size_t>(row.size())));
    dx[i] = row.dot(coefficients[i]);
  }
}

void StateSpaceModel::save(const std::filesystem::path& path) const {
  json j;
  j["format"] = "bssanova-dynamics";
  j["version"] = 1;
  j["state_names"] = state_names_;
  j["forcing_names"] = forcing_names_;
  j["dt"] = dt_;
  j["models"] = json::array();
  for (const auto& m : models_) j["models"].push_back(json::parse(m.to_json(true)));
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw io_error("cannot write dynamics file: " + path.string());
  out << j.dump() << '\n';
  if (!out) throw io_error("failed writing dynamics file: " + path.string());
}

StateSpaceModel StateSpaceModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open dynamics file: " + path.string());
  json j;
  try {
    in >> j;
    if (j.at("format").get<std::string>() != "bssanova-dynamics" || j.at("version").get<int>() != 1) {
      throw io_error("unsupported dynamics file: " + path.string());
    }
    std::vector<GPModel> models;
    for (const auto& m : j.at("models")) models.push_back(GPModel::from_json(m.dump()));
    return StateSpaceModel(std::move(models), j.at("state_names").get<std::vector<std::string>>(),
                           j.at("forcing_names").get<std::vector<std::string>>(),
                           j.at("dt").get<double>());
  } catch (const json::exception& e) {
    throw io_error("malformed dynamics file " + path.string() + ": " + e.what());
  }
}

StateSpaceModel fit_dynamics(const TimeSeriesData& data, std::span<const SelectionConfig> configs) {
  if (configs.size() != data.n_states()) {
    throw invalid_argument("need one selection config per state (" +
                           std::to_string(data.n_states()) + "), got " +
                           std::to_string(configs.size()));
  }
  const DerivativeSamples samples = estimate_derivatives(data);
  const NormalizationBounds bounds = NormalizationBounds::from_data(samples.inputs);

  std::vector<std::string> input_names = data.state_names;
  input_names.insert(input_names.end(), data.forcing_names.begin(), data.forcing_names.end());

  std::vector<GPModel> models;
  for (std::size_t i = 0; i < data.n_states(); ++i) {
    try {
      GPModel m(forward_select(samples.inputs, samples.targets.col(static_cast<Eigen::Index>(i)),
                               configs[i], bounds));
      m.input_names = input_names;
      m.target_name = "d" + data.state_names[i] + "/dt";
      log::info("state " + data.state_names[i] + ": " + std::to_string(m.n_terms()) + " terms");
      models.push_back(std::move(m));
    } catch (const SelectionError& e) {
      throw SelectionError(e.kind(), "state " + std::to_string(i) + " (" + data.state_names[i] +
                                         "): " + e.what(),
                           e.trace());
    } catch (const Error& e) {
      throw Error(e.kind(), "state " + std::to_string(i) + " (" + data.state_names[i] + "): " + e.what());
    }
  }
  return StateSpaceModel(std::move(models), data.state_names, data.forcing_names,
                         data.episodes.front().dt());
}

std::vector<double> rk4_step(const DynamicsFn& f, std::span<const double> x,
                             std::span<const double> u_now, std::span<const double> u_mid,
                             std::span<const double> u_next, double dt) {
  if (!(dt > 0.0)) throw invalid_argument("RK4 step needs dt > 0");
  const std::size_t d = x.size();
  std::vector<double> k1(d), k2(d), k3(d), k4(d), y(d), out(d);
  f(x, u_now, k1);
  for (std::size_t i = 0; i < d; ++i) y[i] = x[i] + 0.5 * dt * k1[i];
  f(y, u_mid, k2);
  for (std::size_t i = 0; i < d; ++i) y[i] = x[i] + 0.5 * dt * k2[i];
  f(y, u_mid, k3);
  for (std::size_t i = 0; i < d; ++i) y[i] = x[i] + dt * k3[i];
  f(y, u_next, k4);
  for (std::size_t i = 0; i < d; ++i) {
    out[i] = x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    if (!std::isfinite(out[i])) {
      throw DivergenceError("state " + std::to_string(i) + " became non-finite",
                            std::numeric_limits<double>::quiet_NaN(), i, {});
    }
  }
  return out;
}

namespace {

DynamicsFn model_rhs(const StateSpaceModel& model, std::vector<Eigen::VectorXd> coefficients) {
  return [&model, coefficients = std::move(coefficients)](std::span<const double> x,
                                                         std::span<const double> u,
                                                         std::span<double> dx) {
    model.derivative(x, u, coefficients, dx);
  };
}

}  // namespace

std::vector<double> rk4_step(const StateSpaceModel& model, std::span<const double> x,
                             std::span<const double> u_now, std::span<const double> u_mid,
                             std::span<const double> u_next, double dt) {
  return rk4_step(model_rhs(model, model.mean_coefficients()), x, u_now, u_mid, u_next, dt);
}

Eigen::MatrixXd integrate_rhs(const DynamicsFn& f, std::span<const double> x0,
                              const Eigen::MatrixXd& forcing, double dt, double t0) {
  if (!(dt > 0.0)) throw invalid_argument("integration needs dt > 0");
  const Eigen::Index T = forcing.rows();
  if (T < 1) throw invalid_argument("forcing series is empty");
  const auto d = static_cast<Eigen::Index>(x0.size());
  const auto nf = static_cast<std::size_t>(forcing.cols());

  Eigen::MatrixXd states(T, d);
  std::vector<double> x(x0.begin(), x0.end());
  std::vector<double> u_now(nf), u_mid(nf), u_next(nf);
  for (Eigen::Index i = 0; i < d; ++i) states(0, i) = x[static_cast<std::size_t>(i)];
  for (Eigen::Index k = 0; k + 1 < T; ++k) {
    for (std::size_t j = 0; j < nf; ++j) {
      const auto c = static_cast<Eigen::Index>(j);
      u_now[j] = forcing(k, c);
      u_next[j] = forcing(k + 1, c);
      u_mid[j] = 0.5 * (u_now[j] + u_next[j]);
    }
    try {
      x = rk4_step(f, x, u_now, u_mid, u_next, dt);
    } catch (const DivergenceError& e) {
      const double t = t0 + static_cast<double>(k + 1) * dt;
      std::ostringstream msg;
      msg << "integration diverged at t=" << t << ": " << e.what();
      throw DivergenceError(msg.str(), t, e.state(), states.topRows(k + 1));
    }
    for (Eigen::Index i = 0; i < d; ++i) states(k + 1, i) = x[static_cast<std::size_t>(i)];
  }
  return states;
}

Trajectory integrate(const StateSpaceModel& model, std::span<const double> x0,
                     const Eigen::MatrixXd& forcing, double dt, bool with_uncertainty,
                     std::size_t n_curves, double t0) {
  if (x0.size() != model.n_states()) throw invalid_argument("initial state has wrong dimension");
  if (static_cast<std::size_t>(forcing.cols()) != model.n_forcing()) {
    throw invalid_argument("forcing series has wrong width");
  }
  Trajectory traj;
  traj.state_names = model.state_names();
  traj.t.resize(static_cast<std::size_t>(forcing.rows()));
  for (std::size_t k = 0; k < traj.t.size(); ++k) traj.t[k] = t0 + static_cast<double>(k) * dt;
  traj.mean = integrate_rhs(model_rhs(model, model.mean_coefficients()), x0, forcing, dt, t0);
  if (!with_uncertainty) return traj;

  for (std::size_t c = 0; c < n_curves; ++c) {
    traj.ensemble.push_back(
        integrate_rhs(model_rhs(model, model.draw_coefficients(c, n_curves)), x0, forcing, dt, t0));
  }
  const Eigen::Index T = traj.mean.rows();
  const Eigen::Index d = traj.mean.cols();
  traj.lower.resize(T, d);
  traj.upper.resize(T, d);
  std::vector<double> values(n_curves);
  for (Eigen::Index k = 0; k < T; ++k) {
    for (Eigen::Index i = 0; i < d; ++i) {
      for (std::size_t c = 0; c < n_curves; ++c) values[c] = traj.ensemble[c](k, i);
      traj.lower(k, i) = percentile(values, 2.5);
      traj.upper(k, i) = percentile(values, 97.5);
    }
  }
  return traj;
}

void Trajectory::write_csv(std::ostream& out) const {
  out << "t";
  for (const auto& n : state_names) {
    out << ',' << csv::quote(n + "_mean");
    if (has_bounds()) out << ',' << csv::quote(n + "_lower") << ',' << csv::quote(n + "_upper");
  }
  out << '\n';
  for (std::size_t k = 0; k < t.size(); ++k) {
    const auto r = static_cast<Eigen::Index>(k);
    out << csv::format_double(t[k]);
    for (Eigen::Index i = 0; i < mean.cols(); ++i) {
      out << ',' << csv::format_double(mean(r, i));
      if (has_bounds()) {
        out << ',' << csv::format_double(lower(r, i)) << ',' << csv::format_double(upper(r, i));
      }
    }
    out << '\n';
  }
}

StateMetrics metrics(const Eigen::MatrixXd& predicted, const Eigen::MatrixXd& truth,
                     std::size_t skip_initial) {
  if (predicted.rows() != truth.rows() || predicted.cols() != truth.cols()) {
    throw invalid_argument("prediction and truth grids are not aligned");
  }
  const auto skip = static_cast<Eigen::Index>(skip_initial);
  if (truth.rows() <= skip) throw invalid_argument("no points left after skip_initial");
  const Eigen::Index n = truth.rows() - skip;

  StateMetrics m;
  for (Eigen::Index i = 0; i < truth.cols(); ++i) {
    const auto t = truth.col(i).tail(n);
    const auto p = predicted.col(i).tail(n);
    m.mae.push_back((p - t).cwiseAbs().mean());
    const double floor = 1e-6 * t.cwiseAbs().maxCoeff();
    double sum = 0.0;
    std::size_t count = 0;
    for (Eigen::Index k = 0; k < n; ++k) {
      if (std::abs(t(k)) > floor) {
        sum += std::abs(p(k) - t(k)) / std::abs(t(k));
        ++count;
      }
    }
    m.mape.push_back(count ? 100.0 * sum / static_cast<double>(count)
                           : std::numeric_limits<double>::quiet_NaN());
  }
  return m;
}

std::vector<EpisodeEvaluation> evaluate_episodes(const StateSpaceModel& model,
                                                 const TimeSeriesData& test,
                                                 std::size_t skip_initial, bool with_uncertainty,
                                                 std::size_t n_curves) {
  test.validate();
  if (test.n_states() != model.n_states() || test.n_forcing() != model.n_forcing()) {
    throw invalid_argument("test data dimensions do not match the model");
  }
  std::vector<EpisodeEvaluation> out;
  for (const auto& ep : test.episodes) {
    EpisodeEvaluation ev;
    ev.id = ep.id;
    try {
      const Eigen::VectorXd x0 = ep.states.row(0).transpose();
      auto traj = integrate(model, std::span<const double>(x0.data(), static_cast<std::size_t>(x0.size())),
                            ep.forcing, ep.dt(), with_uncertainty, n_curves, ep.t.front());
      ev.metrics = metrics(traj.mean, ep.states, skip_initial);
      ev.trajectory = std::move(traj);
    } catch (const Error& e) {
      ev.error = e.what();
      log::warn("episode " + ep.id + ": " + e.what());
    }
    out.push_back(std::move(ev));
  }
  return out;
}

std::vector<FoldResult> cross_validate(const TimeSeriesData& data,
                                       std::span<const SelectionConfig> configs,
                                       const FoldSpec& spec, bool timeseries,
                                       std::size_t skip_initial) {
  const DerivativeSamples samples = estimate_derivatives(data);
  const auto n = static_cast<std::size_t>(samples.inputs.rows());
  const std::size_t d = data.n_states();
  if (configs.size() != d) throw invalid_argument("need one selection config per state");

  std::vector<FoldResult> results;
  for (const auto& fold : kfold(n, spec)) {
    FoldResult r;
    const auto pick = [&](const Eigen::MatrixXd& m, const std::vector<std::size_t>& idx) {
      Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), m.cols());
      for (std::size_t i = 0; i < idx.size(); ++i) {
        out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(idx[i]));
      }
      return out;
    };
    const Eigen::MatrixXd train_x = pick(samples.inputs, fold.train);
    const Eigen::MatrixXd train_y = pick(samples.targets, fold.train);
    const Eigen::MatrixXd test_x = pick(samples.inputs, fold.test);
    const Eigen::MatrixXd test_y = pick(samples.targets, fold.test);
    const NormalizationBounds bounds = NormalizationBounds::from_data(train_x);

    std::vector<GPModel> models;
    try {
      for (std::size_t i = 0; i < d; ++i) {
        GPModel m(forward_select(train_x, train_y.col(static_cast<Eigen::Index>(i)), configs[i], bounds));
        r.n_terms.push_back(m.n_terms());
        const Eigen::VectorXd pred = m.predict_mean(test_x);
        r.derivative_mae.push_back((pred - test_y.col(static_cast<Eigen::Index>(i))).cwiseAbs().mean());
        models.push_back(std::move(m));
      }
    } catch (const Error& e) {
      r.error = e.what();
      results.push_back(std::move(r));
      continue;
    }

    if (timeseries) {
      const StateSpaceModel model(std::move(models), data.state_names, data.forcing_names,
                                  data.episodes.front().dt());
      std::vector<double> abs_sum(d, 0.0), pct_sum(d, 0.0);
      std::vector<std::size_t> abs_count(d, 0), pct_count(d, 0);
      // Split the test block into runs that stay inside one episode.
      std::size_t start = 0;
      try {
        while (start < fold.test.size()) {
          std::size_t end = start + 1;
          while (end < fold.test.size() && fold.test[end] == fold.test[end - 1] + 1 &&
                 samples.episode[fold.test[end]] == samples.episode[fold.test[start]]) {
            ++end;
          }
          const auto& ep = data.episodes[samples.episode[fold.test[start]]];
          const auto first = static_cast<Eigen::Index>(samples.step[fold.test[start]]);
          const auto len = static_cast<Eigen::Index>(end - start);
          start = end;
          if (len <= static_cast<Eigen::Index>(skip_initial)) continue;
          const Eigen::MatrixXd truth = ep.states.middleRows(first, len);
          const Eigen::MatrixXd forcing = ep.forcing.middleRows(first, len);
          const Eigen::VectorXd x0 = truth.row(0).transpose();
          const Eigen::MatrixXd pred = integrate_rhs(
              model_rhs(model, model.mean_coefficients()),
              std::span<const double>(x0.data(), static_cast<std::size_t>(x0.size())), forcing,
              ep.dt(), ep.t[static_cast<std::size_t>(first)]);
          for (std::size_t i = 0; i < d; ++i) {
            const auto c = static_cast<Eigen::Index>(i);
            const double floor = 1e-6 * truth.col(c).cwiseAbs().maxCoeff();
            for (Eigen::Index k = static_cast<Eigen::Index>(skip_initial); k < len; ++k) {
              const double err = std::abs(pred(k, c) - truth(k, c));
              abs_sum[i] += err;
              ++abs_count[i];
              if (std::abs(truth(k, c)) > floor) {
                pct_sum[i] += err / std::abs(truth(k, c));
                ++pct_count[i];
              }
            }
          }
        }
      } catch (const Error& e) {
        r.error = e.what();
      }
      for (std::size_t i = 0; i < d; ++i) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        r.series_mae.push_back(abs_count[i] ? abs_sum[i] / static_cast<double>(abs_count[i]) : nan);
        r.series_mape.push_back(pct_count[i] ? 100.0 * pct_sum[i] / static_cast<double>(pct_count[i])
                                             : nan);
      }
    }
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace bssanova
