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

#include <random>

#include "doctest.h"
#include "test_util.hpp"

using namespace bssanova;

namespace {

struct Fixture {
  Eigen::MatrixXd x;
  Eigen::VectorXd z;
  GPModel model;
};

const Fixture& fixture() {
  static const Fixture f = [] {
    Fixture out;
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-2.0, 3.0);
    std::normal_distribution<double> g(0.0, 0.05);
    out.x.resize(200, 2);
    out.z.resize(200);
    for (Eigen::Index i = 0; i < 200; ++i) {
      out.x(i, 0) = u(rng);
      out.x(i, 1) = u(rng);
      out.z(i) = std::sin(out.x(i, 0)) + 0.5 * out.x(i, 1) + g(rng);
    }
    SelectionConfig cfg;
    cfg.tolerance = 2;
    cfg.hyper.n_draws = 400;
    cfg.hyper.burn_in = 200;
    out.model = GPModel(forward_select(out.x, out.z, cfg));
    out.model.input_names = {"a", "b"};
    out.model.target_name = "y";
    return out;
  }();
  return f;
}

}  // namespace

TEST_CASE("prediction matches the design matrix times the posterior mean") {
  const auto& f = fixture();
  const Eigen::VectorXd mean = f.model.predict_mean(f.x);
  const Eigen::VectorXd expected = f.model.design(f.x) * f.model.selected().posterior.beta_mean;
  CHECK((mean - expected).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(f.model.predict_with(f.x, f.model.selected().posterior.beta_mean) == mean);
  const double rmse = std::sqrt((mean - f.z).squaredNorm() / 200.0);
  CHECK(rmse < 0.15);

  std::vector<double> row(f.model.n_terms());
  const std::vector<double> one{0.5};
  CHECK_THROWS_AS(f.model.design_row(one, row), Error);
}

TEST_CASE("single-row design equals the matrix row") {
  const auto& f = fixture();
  const Eigen::MatrixXd d = f.model.design(f.x.topRows(5));
  for (Eigen::Index r = 0; r < 5; ++r) {
    const std::vector<double> in{f.x(r, 0), f.x(r, 1)};
    std::vector<double> row(f.model.n_terms());
    f.model.design_row(in, row);
    for (std::size_t c = 0; c < row.size(); ++c) CHECK(row[c] == d(r, static_cast<Eigen::Index>(c)));
  }
}

TEST_CASE("inputs beyond the training range are clamped") {
  const auto& f = fixture();
  const auto& b = f.model.selected().bounds;
  Eigen::MatrixXd far(2, 2), edge(2, 2);
  far << 1e6, -1e6, -1e6, 1e6;
  edge << b.upper[0], b.lower[1], b.lower[0], b.upper[1];
  const Eigen::VectorXd p = f.model.predict_mean(far);
  CHECK(p.allFinite());
  CHECK((p - f.model.predict_mean(edge)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("bands contain the mean and come from the retained draws") {
  const auto& f = fixture();
  const Eigen::MatrixXd x = f.x.topRows(30);
  const PredictionBand band = f.model.predict_draws(x, 40);
  CHECK(band.curves.cols() == 40);
  CHECK(band.curves.rows() == 30);
  const Eigen::VectorXd mean = f.model.predict_mean(x);
  for (Eigen::Index i = 0; i < 30; ++i) {
    CHECK(band.lower(i) <= band.upper(i));
    CHECK(band.lower(i) <= mean(i) + 1e-9);
    CHECK(mean(i) <= band.upper(i) + 1e-9);
  }
  const auto idx = evenly_spaced(f.model.n_draws(), 40);
  const Eigen::VectorXd first = f.model.predict_with(x, f.model.selected().posterior.beta_draws.row(idx[0]).transpose());
  CHECK((band.curves.col(0) - first).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("percentile and evenly_spaced helpers") {
  CHECK(percentile({3.0, 1.0, 2.0}, 50.0) == doctest::Approx(2.0));
  CHECK(percentile({0.0, 10.0}, 25.0) == doctest::Approx(2.5));
  CHECK(percentile({4.0}, 97.5) == 4.0);
  CHECK_THROWS_AS(percentile({}, 50.0), Error);
  CHECK_THROWS_AS(percentile({1.0}, 101.0), Error);
  const auto idx = evenly_spaced(1000, 40);
  REQUIRE(idx.size() == 40);
  CHECK(idx.front() == 0);
  for (std::size_t i = 1; i < idx.size(); ++i) CHECK(idx[i] > idx[i - 1]);
  CHECK(idx.back() < 1000);
  CHECK(evenly_spaced(5, 5) == std::vector<std::size_t>{0, 1, 2, 3, 4});
  CHECK_THROWS_AS(evenly_spaced(3, 4), Error);
}

TEST_CASE("model JSON round trip preserves predictions") {
  const auto& f = fixture();
  testutil::TempDir dir("gp");
  f.model.save(dir / "m.json");
  const GPModel back = GPModel::load(dir / "m.json");
  CHECK(back.input_names == f.model.input_names);
  CHECK(back.target_name == "y");
  CHECK(back.n_terms() == f.model.n_terms());
  CHECK(back.n_draws() == f.model.n_draws());
  CHECK(back.selected().terms == f.model.selected().terms);
  CHECK((back.predict_mean(f.x) - f.model.predict_mean(f.x)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(back.to_json() == f.model.to_json());

  const GPModel lean = GPModel::from_json(f.model.to_json(false));
  CHECK_FALSE(lean.has_draws());
  CHECK((lean.predict_mean(f.x) - f.model.predict_mean(f.x)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(lean.predict_draws(f.x, 10), Error);
}

TEST_CASE("malformed model files and shapes are rejected") {
  const auto& f = fixture();
  CHECK_THROWS_AS(GPModel::from_json("{"), Error);
  CHECK_THROWS_AS(GPModel::from_json("{\"format\":\"something-else\"}"), Error);
  CHECK_THROWS_AS(GPModel::load("/nonexistent/model.json"), Error);
  CHECK_THROWS_AS(f.model.predict_mean(Eigen::MatrixXd::Zero(3, 3)), Error);
  CHECK_THROWS_AS(GPModel().predict_mean(f.x), Error);
}
