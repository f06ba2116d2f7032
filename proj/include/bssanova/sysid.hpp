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

#include "bssanova/datasets.hpp"
#include "bssanova/errors.hpp"
#include "bssanova/forward_selection.hpp"
#include "bssanova/gp_model.hpp"
#include "bssanova/timeseries.hpp"

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace bssanova {

/// Finite-difference derivative targets aligned with the concurrent inputs
/// (states followed by forcing) they are regressed on.
struct DerivativeSamples {
  Eigen::MatrixXd inputs;   // N x (d + f)
  Eigen::MatrixXd targets;  // N x d
  std::vector<std::size_t> episode;
  std::vector<std::size_t> step;  // sample index within its episode
};

/// Central differences in the interior, one-sided at each episode's ends.
/// Stencils never cross episode boundaries.
DerivativeSamples estimate_derivatives(const TimeSeriesData& data);

/// One fitted model per state derivative, sharing one set of input bounds.
class StateSpaceModel {
 public:
  StateSpaceModel() = default;
  StateSpaceModel(std::vector<GPModel> models, std::vector<std::string> state_names,
                  std::vector<std::string> forcing_names, double dt);

  std::size_t n_states() const noexcept { return models_.size(); }
  std::size_t n_forcing() const noexcept { return forcing_names_.size(); }
  double dt() const noexcept { return dt_; }
  const GPModel& model(std::size_t state) const { return models_.at(state); }
  const std::vector<std::string>& state_names() const noexcept { return state_names_; }
  const std::vector<std::string>& forcing_names() const noexcept { return forcing_names_; }

  /// Coefficient vectors (one per state) for the posterior mean.
  std::vector<Eigen::VectorXd> mean_coefficients() const;
  /// Coefficients of ensemble member `member` out of `n_curves` evenly spaced draws.
  std::vector<Eigen::VectorXd> draw_coefficients(std::size_t member, std::size_t n_curves) const;

  /// dx = delta(x, u) with inputs clamped to the training bounds.
  void derivative(std::span<const double> x, std::span<const double> u,
                  std::span<const Eigen::VectorXd> coefficients, std::span<double> dx) const;

  void save(const std::filesystem::path& path) const;
  static StateSpaceModel load(const std::filesystem::path& path);

 private:
  std::vector<GPModel> models_;
  std::vector<std::string> state_names_;
  std::vector<std::string> forcing_names_;
  double dt_ = 0.0;
};

/// Runs forward selection once per state derivative.
StateSpaceModel fit_dynamics(const TimeSeriesData& data, std::span<const SelectionConfig> configs);

using DynamicsFn = std::function<void(std::span<const double> x, std::span<const double> u,
                                      std::span<double> dx)>;

/// Classical fourth-order Runge-Kutta step; forcing at t, t + dt/2 and t + dt.
std::vector<double> rk4_step(const DynamicsFn& f, std::span<const double> x,
                             std::span<const double> u_now, std::span<const double> u_mid,
                             std::span<const double> u_next, double dt);
std::vector<double> rk4_step(const StateSpaceModel& model, std::span<const double> x,
                             std::span<const double> u_now, std::span<const double> u_mid,
                             std::span<const double> u_next, double dt);

struct Trajectory {
  std::vector<double> t;
  std::vector<std::string> state_names;
  Eigen::MatrixXd mean;  // T x d
  Eigen::MatrixXd lower;  // empty unless integrated with uncertainty
  Eigen::MatrixXd upper;
  std::vector<Eigen::MatrixXd> ensemble;

  bool has_bounds() const noexcept { return lower.size() > 0; }
  /// Columns: t, then per state mean (and lower, upper when present).
  void write_csv(std::ostream& out) const;
};

/// Integration produced a non-finite state; carries what was computed so far.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, double t, std::size_t state, Eigen::MatrixXd partial)
      : Error(ErrorKind::Divergence, what), t_(t), state_(state), partial_(std::move(partial)) {}
  double t() const noexcept { return t_; }
  std::size_t state() const noexcept { return state_; }
  const Eigen::MatrixXd& partial() const noexcept { return partial_; }

 private:
  double t_;
  std::size_t state_;
  Eigen::MatrixXd partial_;
};

/// Integrates dx/dt = f(x, u) over the rows of `forcing` (T samples spaced by
/// dt, T x f; use a T x 0 matrix for autonomous systems). Forcing at half
/// steps is linearly interpolated. Returns T x d states, row 0 = x0.
Eigen::MatrixXd integrate_rhs(const DynamicsFn& f, std::span<const double> x0,
                              const Eigen::MatrixXd& forcing, double dt, double t0 = 0.0);

/// Mean trajectory from the posterior-mean coefficients and, on request, an
/// ensemble of `n_curves` whole trajectories, one per evenly spaced draw,
/// summarized by per-time 2.5/97.5 percentiles.
Trajectory integrate(const StateSpaceModel& model, std::span<const double> x0,
                     const Eigen::MatrixXd& forcing, double dt, bool with_uncertainty = false,
                     std::size_t n_curves = 40, double t0 = 0.0);

struct StateMetrics {
  std::vector<double> mae;
  std::vector<double> mape;  // percent; NaN if no point clears the denominator floor
};

/// MAE and MAPE per state after dropping the first `skip_initial` samples.
/// MAPE skips points with |truth| <= 1e-6 max|truth|.
StateMetrics metrics(const Eigen::MatrixXd& predicted, const Eigen::MatrixXd& truth,
                     std::size_t skip_initial = 0);

struct EpisodeEvaluation {
  std::string id;
  std::optional<Trajectory> trajectory;
  StateMetrics metrics;
  std::string error;  // non-empty if integration failed
};

/// Replays every episode from its first sample with its own forcing. A
/// failing episode is reported, not thrown.
std::vector<EpisodeEvaluation> evaluate_episodes(const StateSpaceModel& model,
                                                 const TimeSeriesData& test,
                                                 std::size_t skip_initial = 0,
                                                 bool with_uncertainty = false,
                                                 std::size_t n_curves = 40);

struct FoldResult {
  std::vector<double> derivative_mae;  // per state
  std::vector<double> series_mae;      // per state; empty when not requested
  std::vector<double> series_mape;
  std::vector<std::size_t> n_terms;
  std::string error;
};

/// k-fold cross-validation over the derivative samples (folds over the
/// global sample index). With `timeseries`, each test block is also
/// integrated from its first true state and scored after `skip_initial`.
std::vector<FoldResult> cross_validate(const TimeSeriesData& data,
                                       std::span<const SelectionConfig> configs,
                                       const FoldSpec& folds, bool timeseries,
                                       std::size_t skip_initial = 0);

}  // namespace bssanova
