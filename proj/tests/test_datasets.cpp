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

#include "bssanova/datasets.hpp"
#include "bssanova/errors.hpp"

#include <fstream>
#include <set>

#include "doctest.h"
#include "test_util.hpp"

using namespace bssanova;

namespace {

SIRConfig short_config() {
  SIRConfig cfg;
  cfg.horizon = 2.0;
  cfg.dt = 0.02;
  return cfg;
}

}  // namespace

TEST_CASE("SIR right-hand side") {
  const SIRConfig cfg;
  const SIRRates r = sir_rhs(900.0, 100.0, 0.0, 2.0, cfg);
  CHECK(r.ds == doctest::Approx(-180.0));
  CHECK(r.di == doctest::Approx(130.0));
  CHECK(r.dr == doctest::Approx(50.0));
  CHECK(r.ds + r.di + r.dr == doctest::Approx(0.0).scale(1.0));
  const SIRRates none = sir_rhs(1000.0, 0.0, 0.0, 5.0, cfg);
  CHECK(none.di == 0.0);
  CHECK_THROWS_AS(sir_rhs(-1.0, 1.0, 1000.0, 1.0, cfg), Error);
  CHECK_THROWS_AS(sir_rhs(500.0, 100.0, 0.0, 1.0, cfg), Error);
}

TEST_CASE("transmissibility schedules") {
  Schedule ramp{ScheduleKind::Ramp, 8.15, -1.0, 4.0, 0.0, 1.0};
  CHECK(ramp(0.0) == doctest::Approx(8.15));
  CHECK(ramp(2.0) == doctest::Approx(6.15));
  CHECK(ramp(4.0) == doctest::Approx(4.15));
  CHECK(ramp(9.0) == doctest::Approx(4.15));
  Schedule sine{ScheduleKind::Sinusoid, 1.35, 0.0, 4.0, 1.35, 1.0};
  CHECK(sine(0.25) == doctest::Approx(2.7));
  CHECK(sine(1.0) == doctest::Approx(1.35));
  for (double t = 0.0; t < 10.0; t += 0.01) CHECK(sine(t) >= -1e-12);
  CHECK(ramp.kind_name() == "ramp");
}

TEST_CASE("training and test corpora: counts, conservation, positivity") {
  const SIRConfig cfg = short_config();
  const SIRCorpus train = generate_sir_training(cfg);
  const SIRCorpus test = generate_sir_test(cfg);
  CHECK(train.data.episodes.size() == 58);
  CHECK(test.data.episodes.size() == 24);
  CHECK(train.data.state_names == std::vector<std::string>{"I", "R"});
  CHECK(train.data.forcing_names == std::vector<std::string>{"B"});
  train.data.validate();
  test.data.validate();

  std::set<double> b_values;
  for (const auto& c : train.curves) {
    CHECK(c.schedule.kind == ScheduleKind::Constant);
    b_values.insert(c.schedule.b0);
  }
  CHECK(b_values == std::set<double>{0.5, 2.2, 3.9, 5.6, 7.3, 9.0});

  std::size_t ramps = 0;
  for (const auto& c : test.curves) {
    if (c.schedule.kind == ScheduleKind::Ramp) {
      ++ramps;
      CHECK(c.schedule.slope == (c.schedule.b0 == 8.15 ? -1.0 : 1.0));
    } else {
      CHECK(c.schedule.amplitude >= 0.5);
      CHECK(c.schedule.amplitude <= 3.0);
      CHECK(c.schedule.period == 1.0);
    }
  }
  CHECK(ramps == 12);

  for (const SIRCorpus* corpus : {&train, &test}) {
    for (std::size_t e = 0; e < corpus->data.episodes.size(); ++e) {
      const auto& ep = corpus->data.episodes[e];
      CHECK(ep.length() == 101);
      CHECK(ep.states.minCoeff() >= -1e-9);
      for (std::size_t k = 0; k < ep.length(); ++k) {
        const double total = corpus->susceptible[e][k] + ep.states(static_cast<Eigen::Index>(k), 0) +
                             ep.states(static_cast<Eigen::Index>(k), 1);
        CHECK(std::abs(total - cfg.population) <= 1e-6 * cfg.population);
      }
    }
  }
}

TEST_CASE("simulation matches a fine reference and is deterministic") {
  const SIRConfig cfg = short_config();
  SIRCurve c;
  c.id = "x";
  c.i0 = 50.0;
  c.r0 = 10.0;
  c.schedule.b0 = 3.0;
  const Episode coarse = simulate_sir(c, cfg, nullptr);
  SIRConfig fine = cfg;
  fine.dt = cfg.dt / 8.0;
  const Episode ref = simulate_sir(c, fine, nullptr);
  CHECK(std::abs(coarse.states(100, 0) - ref.states(800, 0)) < 1e-4);
  CHECK(std::abs(coarse.states(100, 1) - ref.states(800, 1)) < 1e-4);
  const Episode again = simulate_sir(c, cfg, nullptr);
  CHECK(again.states == coarse.states);

  const SIRCorpus a = generate_sir_test(cfg);
  const SIRCorpus b = generate_sir_test(cfg);
  for (std::size_t e = 0; e < a.curves.size(); ++e) {
    CHECK(a.curves[e].i0 == b.curves[e].i0);
    CHECK(a.data.episodes[e].states == b.data.episodes[e].states);
  }

  c.i0 = 2000.0;
  CHECK_THROWS_AS(simulate_sir(c, cfg, nullptr), Error);
  SIRConfig bad = cfg;
  bad.gamma = 0.0;
  CHECK_THROWS_AS(generate_sir_training(bad), Error);
}

TEST_CASE("corpus files round trip") {
  const SIRCorpus test = generate_sir_test(short_config());
  testutil::TempDir dir("corpus");
  write_sir_corpus(test, dir.path());
  CHECK(std::filesystem::exists(dir / "manifest.json"));
  CHECK(testutil::slurp(dir / "test_00.csv").rfind("t,S,I,R,B\n", 0) == 0);
  const TimeSeriesData back = read_corpus(dir.path());
  REQUIRE(back.episodes.size() == 24);
  CHECK(back.state_names == test.data.state_names);
  CHECK(back.forcing_names == test.data.forcing_names);
  for (std::size_t e = 0; e < 24; ++e) {
    CHECK(back.episodes[e].id == test.data.episodes[e].id);
    CHECK(back.episodes[e].states == test.data.episodes[e].states);
    CHECK(back.episodes[e].forcing == test.data.episodes[e].forcing);
  }
  CHECK_THROWS_AS(read_corpus(dir / "nope"), Error);
  std::filesystem::remove(dir / "test_03.csv");
  CHECK_THROWS_AS(read_corpus(dir.path()), Error);
}

TEST_CASE("cascaded-tanks CSV loading") {
  testutil::TempDir dir("tanks");
  {
    std::ofstream out(dir / "tanks.csv");
    out << "u,h1,h2\n";
    for (int k = 0; k < 10; ++k) out << 0.1 * k << ',' << 1.0 + k << ',' << 2.0 + k << '\n';
  }
  const TimeSeriesData d = load_cascaded_tanks(dir / "tanks.csv");
  CHECK(d.state_names == std::vector<std::string>{"h1", "h2"});
  CHECK(d.forcing_names == std::vector<std::string>{"u"});
  REQUIRE(d.episodes.size() == 1);
  CHECK(d.episodes[0].length() == 10);
  CHECK(d.episodes[0].t[3] == 3.0);
  CHECK(d.episodes[0].states(4, 1) == 6.0);
  CHECK(d.episodes[0].forcing(2, 0) == doctest::Approx(0.2));

  {
    std::ofstream out(dir / "eps.csv");
    out << "episode,time,u,h1,h2\n";
    for (int e = 0; e < 2; ++e) {
      for (int k = 0; k < 5; ++k) out << e << ',' << 4.0 * k << ",1,2,3\n";
    }
  }
  const TimeSeriesData two = load_cascaded_tanks(dir / "eps.csv");
  CHECK(two.episodes.size() == 2);
  CHECK(two.episodes[1].dt() == 4.0);

  {
    std::ofstream out(dir / "bad.csv");
    out << "u,h1,h2\n1,2,3\n1,x,3\n1,2,3\n";
  }
  CHECK_THROWS_AS(load_cascaded_tanks(dir / "bad.csv"), Error);
  {
    std::ofstream out(dir / "cols.csv");
    out << "a,b\n1,2\n1,2\n1,2\n";
  }
  CHECK_THROWS_AS(load_cascaded_tanks(dir / "cols.csv"), Error);
  CHECK_THROWS_AS(load_cascaded_tanks(dir / "missing.csv"), Error);
}

TEST_CASE("k-fold partitions") {
  const auto folds = kfold(23, FoldSpec{5, false, 0});
  REQUIRE(folds.size() == 5);
  std::vector<int> seen(23, 0);
  for (const auto& f : folds) {
    CHECK(f.test.size() >= 4);
    CHECK(f.test.size() <= 5);
    CHECK(f.train.size() + f.test.size() == 23);
    for (std::size_t i = 1; i < f.test.size(); ++i) CHECK(f.test[i] == f.test[i - 1] + 1);
    for (auto i : f.test) ++seen[i];
  }
  for (int s : seen) CHECK(s == 1);

  const auto a = kfold(50, FoldSpec{5, true, 3});
  const auto b = kfold(50, FoldSpec{5, true, 3});
  for (std::size_t f = 0; f < 5; ++f) CHECK(a[f].test == b[f].test);
  CHECK_THROWS_AS(kfold(3, FoldSpec{5, false, 0}), Error);
  CHECK_THROWS_AS(kfold(10, FoldSpec{1, false, 0}), Error);
}

TEST_CASE("time series validation") {
  TimeSeriesData d;
  d.state_names = {"x"};
  Episode ep;
  ep.id = "e";
  ep.t = {0.0, 1.0, 3.0};
  ep.states = Eigen::MatrixXd::Zero(3, 1);
  ep.forcing.resize(3, 0);
  d.episodes.push_back(ep);
  CHECK_THROWS_AS(d.validate(), Error);
  d.episodes[0].t = {0.0, 1.0, 2.0};
  d.validate();
  d.episodes[0].states(1, 0) = std::nan("");
  CHECK_THROWS_AS(d.validate(), Error);
  CHECK(d.total_samples() == 3);
}
