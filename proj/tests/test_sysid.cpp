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
#include "bssanova/errors.hpp"

#include <cmath>
#include <sstream>

#include "doctest.h"
#include "test_util.hpp"

using namespace bssanova;

namespace {

Episode sampled(const std::string& id, double dt, std::size_t n, double (*f)(double)) {
  Episode ep;
  ep.id = id;
  ep.states.resize(static_cast<Eigen::Index>(n), 1);
  ep.forcing.resize(static_cast<Eigen::Index>(n), 0);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * dt;
    ep.t.push_back(t);
    ep.states(static_cast<Eigen::Index>(k), 0) = f(t);
  }
  return ep;
}

double error_at_one(double dt) {
  const DynamicsFn f = [](std::span<const double> x, std::span<const double>, std::span<double> dx) {
    dx[0] = -x[0];
  };
  const auto steps = static_cast<Eigen::Index>(std::lround(1.0 / dt));
  const std::vector<double> x0{1.0};
  const Eigen::MatrixXd traj = integrate_rhs(f, x0, Eigen::MatrixXd(steps + 1, 0), dt);
  return std::abs(traj(steps, 0) - std::exp(-1.0));
}

/// Decaying episodes of x' = -x from several starting points.
TimeSeriesData decay_data() {
  TimeSeriesData data;
  data.state_names = {"x"};
  for (int e = 0; e < 6; ++e) {
    Episode ep;
    ep.id = "e" + std::to_string(e);
    const double x0 = 0.5 + 0.4 * e;
    ep.states.resize(101, 1);
    ep.forcing.resize(101, 0);
    for (int k = 0; k <= 100; ++k) {
      ep.t.push_back(0.02 * k);
      ep.states(k, 0) = x0 * std::exp(-0.02 * k);
    }
    data.episodes.push_back(std::move(ep));
  }
  return data;
}

SelectionConfig small_config() {
  SelectionConfig cfg;
  cfg.tolerance = 2;
  cfg.hyper.n_draws = 300;
  cfg.hyper.burn_in = 100;
  return cfg;
}

const StateSpaceModel& decay_model() {
  static const StateSpaceModel m = [] {
    const SelectionConfig cfg = small_config();
    return fit_dynamics(decay_data(), std::span<const SelectionConfig>(&cfg, 1));
  }();
  return m;
}

}  // namespace

TEST_CASE("finite differences: linear exact, quadratic exact inside") {
  TimeSeriesData data;
  data.state_names = {"x"};
  data.episodes.push_back(sampled("lin", 0.1, 20, [](double t) { return 3.0 * t + 1.0; }));
  data.episodes.push_back(sampled("sq", 0.1, 20, [](double t) { return t * t; }));
  const DerivativeSamples s = estimate_derivatives(data);
  REQUIRE(s.targets.rows() == 40);
  for (Eigen::Index i = 0; i < 20; ++i) CHECK(s.targets(i, 0) == doctest::Approx(3.0).epsilon(1e-10));
  for (Eigen::Index k = 1; k < 19; ++k) {
    CHECK(s.targets(20 + k, 0) == doctest::Approx(2.0 * 0.1 * double(k)).epsilon(1e-9));
  }
  // One-sided ends are off by dt for t^2.
  CHECK(s.targets(20, 0) == doctest::Approx(0.1));
  CHECK(s.targets(39, 0) == doctest::Approx(2.0 * 1.9 - 0.1));
  CHECK(s.episode[19] == 0);
  CHECK(s.episode[20] == 1);
  CHECK(s.step[20] == 0);
  CHECK(s.inputs(25, 0) == data.episodes[1].states(5, 0));
}

TEST_CASE("finite differences never cross an episode boundary") {
  TimeSeriesData data;
  data.state_names = {"x"};
  data.episodes.push_back(sampled("a", 1.0, 5, [](double) { return 0.0; }));
  data.episodes.push_back(sampled("b", 1.0, 5, [](double) { return 100.0; }));
  const DerivativeSamples s = estimate_derivatives(data);
  CHECK(s.targets.cwiseAbs().maxCoeff() == 0.0);

  TimeSeriesData tiny;
  tiny.state_names = {"x"};
  tiny.episodes.push_back(sampled("c", 1.0, 2, [](double t) { return t; }));
  CHECK_THROWS_AS(estimate_derivatives(tiny), Error);
}

TEST_CASE("RK4 global error is fourth order") {
  const double e1 = error_at_one(0.1);
  const double e2 = error_at_one(0.05);
  const double ratio = e1 / e2;
  CHECK(ratio >= 8.0);
  CHECK(ratio <= 32.0);
  CHECK(ratio == doctest::Approx(16.0).epsilon(0.1));
}

TEST_CASE("RK4 uses the half-step forcing") {
  // x' = u(t) with u linear in t integrates exactly.
  const DynamicsFn f = [](std::span<const double>, std::span<const double> u, std::span<double> dx) {
    dx[0] = u[0];
  };
  Eigen::MatrixXd forcing(11, 1);
  for (int k = 0; k <= 10; ++k) forcing(k, 0) = 2.0 * 0.1 * k;
  const std::vector<double> x0{0.0};
  const Eigen::MatrixXd traj = integrate_rhs(f, x0, forcing, 0.1);
  CHECK(traj(10, 0) == doctest::Approx(1.0).epsilon(1e-12));

  const std::vector<double> x{1.0}, u0{0.0}, um{1.0}, u1{2.0};
  const auto next = rk4_step(f, x, u0, um, u1, 0.5);
  CHECK(next[0] == doctest::Approx(1.0 + 0.5 * (0.0 + 4.0 * 1.0 + 2.0) / 6.0));
}

TEST_CASE("divergence reports time and partial trajectory") {
  const DynamicsFn f = [](std::span<const double> x, std::span<const double>, std::span<double> dx) {
    dx[0] = x[0] * x[0];
  };
  const std::vector<double> x0{1.0};
  try {
    integrate_rhs(f, x0, Eigen::MatrixXd(400, 0), 0.01);
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.kind() == ErrorKind::Divergence);
    CHECK(e.t() > 0.9);
    CHECK(e.t() < 1.2);
    CHECK(e.partial().rows() >= 1);
    CHECK(e.partial()(0, 0) == 1.0);
  }
}

TEST_CASE("metrics") {
  Eigen::MatrixXd truth(4, 2), pred(4, 2);
  truth << 1, 0, 2, 10, 4, 20, 8, 40;
  pred = truth;
  auto m = metrics(pred, truth);
  CHECK(m.mae == std::vector<double>{0.0, 0.0});
  CHECK(m.mape == std::vector<double>{0.0, 0.0});
  pred.col(0).array() += 1.0;
  pred(0, 1) = 5.0;  // truth 0 falls under the MAPE floor
  m = metrics(pred, truth);
  CHECK(m.mae[0] == doctest::Approx(1.0));
  CHECK(m.mape[0] == doctest::Approx((100.0 + 50.0 + 25.0 + 12.5) / 4.0));
  CHECK(m.mae[1] == doctest::Approx(5.0 / 4.0));
  CHECK(m.mape[1] == doctest::Approx(0.0));
  m = metrics(pred, truth, 2);
  CHECK(m.mae[0] == doctest::Approx(1.0));
  CHECK(m.mape[0] == doctest::Approx((25.0 + 12.5) / 2.0));
  CHECK_THROWS_AS(metrics(pred, truth, 4), Error);
  CHECK_THROWS_AS(metrics(pred.topRows(3), truth), Error);
}

TEST_CASE("planted linear dynamics are recovered") {
  const StateSpaceModel& m = decay_model();
  REQUIRE(m.n_states() == 1);
  CHECK(m.n_forcing() == 0);
  CHECK(m.model(0).n_inputs() == 1);
  CHECK(m.model(0).selected().terms.max_order() >= 1);
  CHECK(m.model(0).target_name == "dx/dt");

  const auto coeffs = m.mean_coefficients();
  for (double x : {0.6, 1.0, 2.0, 2.4}) {
    double dx = 0.0;
    m.derivative(std::span<const double>(&x, 1), {}, coeffs, std::span<double>(&dx, 1));
    CHECK(dx == doctest::Approx(-x).epsilon(0.02));
  }

  const std::vector<double> x0{1.7};
  const Trajectory traj = integrate(m, x0, Eigen::MatrixXd(101, 0), 0.02, true, 20);
  CHECK(traj.mean(100, 0) == doctest::Approx(1.7 * std::exp(-2.0)).epsilon(0.02));
  REQUIRE(traj.has_bounds());
  CHECK(traj.ensemble.size() == 20);
  for (Eigen::Index k = 0; k < traj.mean.rows(); ++k) {
    CHECK(traj.lower(k, 0) <= traj.upper(k, 0));
  }
  CHECK(traj.t.back() == doctest::Approx(2.0));
}

TEST_CASE("a model with only a zero intercept keeps the state constant") {
  const StateSpaceModel& m = decay_model();
  std::vector<Eigen::VectorXd> zero{Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m.model(0).n_terms()))};
  const DynamicsFn f = [&](std::span<const double> x, std::span<const double> u, std::span<double> dx) {
    m.derivative(x, u, zero, dx);
  };
  const std::vector<double> x0{1.3};
  const Eigen::MatrixXd traj = integrate_rhs(f, x0, Eigen::MatrixXd(50, 0), 0.1);
  CHECK((traj.array() - 1.3).abs().maxCoeff() == 0.0);
}

TEST_CASE("evaluation, trajectory CSV and dynamics round trip") {
  const StateSpaceModel& m = decay_model();
  const TimeSeriesData test = decay_data();
  const auto evals = evaluate_episodes(m, test, 5);
  REQUIRE(evals.size() == test.episodes.size());
  for (const auto& e : evals) {
    CHECK(e.error.empty());
    CHECK(e.metrics.mape[0] < 2.0);
  }

  std::ostringstream out;
  evals[0].trajectory->write_csv(out);
  CHECK(out.str().rfind("t,x_mean\n", 0) == 0);

  testutil::TempDir dir("sysid");
  m.save(dir / "dyn.json");
  const StateSpaceModel back = StateSpaceModel::load(dir / "dyn.json");
  CHECK(back.state_names() == m.state_names());
  CHECK(back.dt() == m.dt());
  const std::vector<double> x0{1.0};
  const Trajectory a = integrate(m, x0, Eigen::MatrixXd(30, 0), 0.02);
  const Trajectory b = integrate(back, x0, Eigen::MatrixXd(30, 0), 0.02);
  CHECK((a.mean - b.mean).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(StateSpaceModel::load(dir / "missing.json"), Error);
}

TEST_CASE("ensemble of one mean-valued member equals the mean trajectory") {
  const StateSpaceModel& m = decay_model();
  const auto coeffs = m.mean_coefficients();
  const DynamicsFn f = [&](std::span<const double> x, std::span<const double> u, std::span<double> dx) {
    m.derivative(x, u, coeffs, dx);
  };
  const std::vector<double> x0{2.0};
  const Eigen::MatrixXd direct = integrate_rhs(f, x0, Eigen::MatrixXd(40, 0), 0.02);
  const Trajectory t = integrate(m, x0, Eigen::MatrixXd(40, 0), 0.02);
  CHECK((direct - t.mean).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("forcing dimension bookkeeping and cross-validation") {
  TimeSeriesData data;
  data.state_names = {"a", "b"};
  data.forcing_names = {"u"};
  for (int e = 0; e < 3; ++e) {
    Episode ep;
    ep.id = "e" + std::to_string(e);
    ep.states.resize(60, 2);
    ep.forcing.resize(60, 1);
    double a = 1.0 + e, b = 0.5;
    for (int k = 0; k < 60; ++k) {
      const double t = 0.05 * k;
      const double u = std::sin(t + e);
      ep.t.push_back(t);
      ep.states(k, 0) = a;
      ep.states(k, 1) = b;
      ep.forcing(k, 0) = u;
      a += 0.05 * (-0.5 * a + u);
      b += 0.05 * (a - b);
    }
    data.episodes.push_back(std::move(ep));
  }
  const std::vector<SelectionConfig> cfgs(2, small_config());
  const StateSpaceModel m = fit_dynamics(data, cfgs);
  CHECK(m.model(0).n_inputs() == 3);
  CHECK(m.model(1).n_inputs() == 3);
  CHECK(m.model(1).input_names == std::vector<std::string>{"a", "b", "u"});
  CHECK(m.forcing_names() == std::vector<std::string>{"u"});

  const std::vector<SelectionConfig> one(1, small_config());
  CHECK_THROWS_AS(fit_dynamics(data, one), Error);

  const auto folds = cross_validate(data, cfgs, FoldSpec{3, false, 0}, true, 2);
  REQUIRE(folds.size() == 3);
  for (const auto& f : folds) {
    CHECK(f.error.empty());
    CHECK(f.derivative_mae.size() == 2);
    CHECK(f.series_mae.size() == 2);
    CHECK(f.n_terms.size() == 2);
    CHECK(f.derivative_mae[0] < 0.2);
  }
}
