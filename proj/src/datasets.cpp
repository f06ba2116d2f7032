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

#include "bssanova/csv.hpp"
#include "bssanova/errors.hpp"
#include "bssanova/gibbs_sampler.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace bssanova {

using nlohmann::json;

double Episode::dt() const {
  if (t.size() < 2) throw data_error("episode '" + id + "' has fewer than two samples");
  return t[1] - t[0];
}

std::size_t TimeSeriesData::total_samples() const noexcept {
  std::size_t n = 0;
  for (const auto& e : episodes) n += e.length();
  return n;
}

void TimeSeriesData::validate() const {
  if (state_names.empty()) throw data_error("time series has no states");
  if (episodes.empty()) throw data_error("time series has no episodes");
  const auto d = static_cast<Eigen::Index>(n_states());
  const auto f = static_cast<Eigen::Index>(n_forcing());
  for (const auto& e : episodes) {
    const auto T = static_cast<Eigen::Index>(e.length());
    const std::string where = "episode '" + e.id + "'";
    if (e.states.rows() != T || e.states.cols() != d) {
      throw data_error(where + ": state matrix shape does not match");
    }
    if (e.forcing.rows() != T || e.forcing.cols() != f) {
      throw data_error(where + ": forcing matrix shape does not match");
    }
    if (!e.states.allFinite() || !e.forcing.allFinite()) {
      throw data_error(where + ": non-finite value");
    }
    if (e.length() < 2) continue;
    const double dt = e.t[1] - e.t[0];
    if (!(dt > 0.0)) throw data_error(where + ": time is not strictly increasing");
    for (std::size_t k = 1; k < e.length(); ++k) {
      const double step = e.t[k] - e.t[k - 1];
      if (!(step > 0.0)) throw data_error(where + ": time is not strictly increasing");
      if (std::abs(step - dt) > 1e-6 * dt) {
        throw data_error(where + ": non-uniform time step at sample " + std::to_string(k));
      }
    }
  }
}

void SIRConfig::validate() const {
  if (!(population > 0.0)) throw invalid_argument("SIR population must be positive");
  if (!(gamma > 0.0)) throw invalid_argument("SIR gamma must be positive");
  if (!(dt > 0.0)) throw invalid_argument("SIR dt must be positive");
  if (!(horizon > dt)) throw invalid_argument("SIR horizon must exceed dt");
}

namespace {

SIRRates sir_rates(double s, double i, double transmissibility, const SIRConfig& cfg) {
  const double infection = transmissibility * i * s / cfg.population;
  const double recovery = cfg.gamma * i;
  return SIRRates{-infection, infection - recovery, recovery};
}

}  // namespace

SIRRates sir_rhs(double s, double i, double r, double transmissibility, const SIRConfig& cfg) {
  constexpr double kNegTol = -1e-9;
  if (s < kNegTol || i < kNegTol || r < kNegTol) {
    throw data_error("negative SIR state");
  }
  if (std::abs(s + i + r - cfg.population) > 1e-6 * cfg.population) {
    throw data_error("SIR state does not sum to the population");
  }
  return sir_rates(s, i, transmissibility, cfg);
}

double Schedule::operator()(double t) const noexcept {
  switch (kind) {
    case ScheduleKind::Constant: return b0;
    case ScheduleKind::Ramp: return b0 + slope * std::clamp(t, 0.0, ramp_end);
    case ScheduleKind::Sinusoid: return b0 + amplitude * std::sin(2.0 * std::numbers::pi * t / period);
  }
  return b0;
}

std::string Schedule::kind_name() const {
  switch (kind) {
    case ScheduleKind::Constant: return "constant";
    case ScheduleKind::Ramp: return "ramp";
    case ScheduleKind::Sinusoid: return "sinusoid";
  }
  return "constant";
}

std::vector<std::pair<double, double>> sir_initial_condition_grid() {
  std::vector<std::pair<double, double>> grid;
  for (double i0 : {10.0, 50.0, 100.0, 200.0, 400.0}) {
    for (double r0 : {0.0, 200.0, 400.0}) grid.emplace_back(i0, r0);
  }
  return grid;
}

namespace {

std::vector<std::size_t> seeded_order(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  return idx;
}

Episode simulate_with_substeps(const SIRCurve& curve, const SIRConfig& cfg, int substeps,
                               std::vector<double>* susceptible) {
  const auto n_steps = static_cast<std::size_t>(std::llround(cfg.horizon / cfg.dt));
  const double h = cfg.dt / substeps;
  Episode ep;
  ep.id = curve.id;
  ep.t.resize(n_steps + 1);
  ep.states.resize(static_cast<Eigen::Index>(n_steps + 1), 2);
  ep.forcing.resize(static_cast<Eigen::Index>(n_steps + 1), 1);
  if (susceptible) susceptible->assign(n_steps + 1, 0.0);

  std::array<double, 3> x{cfg.population - curve.i0 - curve.r0, curve.i0, curve.r0};
  const auto rhs = [&](const std::array<double, 3>& y, double t) {
    // Unchecked: intermediate RK stages may dip slightly below zero before
    // the step-size retry kicks in.
    const SIRRates d = sir_rates(y[0], y[1], curve.schedule(t), cfg);
    return std::array<double, 3>{d.ds, d.di, d.dr};
  };
  const auto record = [&](std::size_t k, double t) {
    const auto row = static_cast<Eigen::Index>(k);
    ep.t[k] = t;
    ep.states(row, 0) = x[1];
    ep.states(row, 1) = x[2];
    ep.forcing(row, 0) = curve.schedule(t);
    if (susceptible) (*susceptible)[k] = x[0];
  };

  record(0, 0.0);
  for (std::size_t k = 1; k <= n_steps; ++k) {
    for (int s = 0; s < substeps; ++s) {
      const double t = static_cast<double>(k - 1) * cfg.dt + s * h;
      const auto k1 = rhs(x, t);
      std::array<double, 3> y{};
      for (int j = 0; j < 3; ++j) y[j] = x[j] + 0.5 * h * k1[j];
      const auto k2 = rhs(y, t + 0.5 * h);
      for (int j = 0; j < 3; ++j) y[j] = x[j] + 0.5 * h * k2[j];
      const auto k3 = rhs(y, t + 0.5 * h);
      for (int j = 0; j < 3; ++j) y[j] = x[j] + h * k3[j];
      const auto k4 = rhs(y, t + h);
      for (int j = 0; j < 3; ++j) x[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    }
    record(k, static_cast<double>(k) * cfg.dt);
  }
  return ep;
}

}  // namespace

Episode simulate_sir(const SIRCurve& curve, const SIRConfig& cfg, std::vector<double>* susceptible) {
  cfg.validate();
  if (curve.i0 < 0.0 || curve.r0 < 0.0 || curve.i0 + curve.r0 > cfg.population) {
    throw invalid_argument("SIR initial condition outside the population simplex");
  }
  for (int substeps = 1; substeps <= 64; substeps *= 2) {
    std::vector<double> s;
    Episode ep = simulate_with_substeps(curve, cfg, substeps, &s);
    const bool nonneg = ep.states.minCoeff() >= -1e-9 &&
                        *std::min_element(s.begin(), s.end()) >= -1e-9;
    if (nonneg) {
      if (susceptible) *susceptible = std::move(s);
      return ep;
    }
  }
  throw numerical_error("SIR simulation of '" + curve.id + "' went negative at every step size");
}

namespace {

SIRCorpus simulate_corpus(const SIRConfig& cfg, std::string kind, std::vector<SIRCurve> curves) {
  SIRCorpus corpus;
  corpus.config = cfg;
  corpus.kind = std::move(kind);
  corpus.data.state_names = {"I", "R"};
  corpus.data.forcing_names = {"B"};
  for (const auto& c : curves) {
    std::vector<double> s;
    corpus.data.episodes.push_back(simulate_sir(c, cfg, &s));
    corpus.susceptible.push_back(std::move(s));
  }
  corpus.curves = std::move(curves);
  return corpus;
}

std::string curve_id(const std::string& prefix, std::size_t n) {
  std::ostringstream os;
  os << prefix << '_';
  if (n < 10) os << '0';
  os << n;
  return os.str();
}

}  // namespace

SIRCorpus generate_sir_training(const SIRConfig& cfg) {
  cfg.validate();
  constexpr std::array<double, 6> kB{0.5, 2.2, 3.9, 5.6, 7.3, 9.0};
  constexpr std::array<std::size_t, 6> kCount{10, 10, 10, 10, 9, 9};
  const auto grid = sir_initial_condition_grid();
  std::vector<SIRCurve> curves;
  for (std::size_t j = 0; j < kB.size(); ++j) {
    const auto order = seeded_order(grid.size(), cfg.seed + j);
    for (std::size_t c = 0; c < kCount[j]; ++c) {
      SIRCurve curve;
      curve.id = curve_id("train", curves.size());
      curve.i0 = grid[order[c]].first;
      curve.r0 = grid[order[c]].second;
      curve.schedule.kind = ScheduleKind::Constant;
      curve.schedule.b0 = kB[j];
      curves.push_back(curve);
    }
  }
  return simulate_corpus(cfg, "train", std::move(curves));
}

SIRCorpus generate_sir_test(const SIRConfig& cfg) {
  cfg.validate();
  constexpr std::array<double, 3> kB0{1.35, 4.75, 8.15};
  constexpr std::array<double, 3> kSlope{1.0, 1.0, -1.0};
  constexpr std::array<double, 3> kAmplitude{0.5, 1.75, 3.0};
  constexpr std::size_t kPerCell = 4;
  const auto grid = sir_initial_condition_grid();
  std::vector<SIRCurve> curves;
  for (std::size_t g = 0; g < kB0.size(); ++g) {
    for (std::size_t shape = 0; shape < 2; ++shape) {
      const auto order = seeded_order(grid.size(), cfg.seed + 1000 + 2 * g + shape);
      for (std::size_t c = 0; c < kPerCell; ++c) {
        SIRCurve curve;
        curve.id = curve_id("test", curves.size());
        curve.i0 = grid[order[c]].first;
        curve.r0 = grid[order[c]].second;
        curve.schedule.b0 = kB0[g];
        if (shape == 0) {
          curve.schedule.kind = ScheduleKind::Ramp;
          curve.schedule.slope = kSlope[g];
          curve.schedule.ramp_end = 4.0;
        } else {
          curve.schedule.kind = ScheduleKind::Sinusoid;
          curve.schedule.amplitude = std::min(kAmplitude[c % kAmplitude.size()], kB0[g]);
          curve.schedule.period = 1.0;
        }
        curves.push_back(curve);
      }
    }
  }
  return simulate_corpus(cfg, "test", std::move(curves));
}

void write_sir_corpus(const SIRCorpus& corpus, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw io_error("cannot create corpus directory " + dir.string() + ": " + ec.message());

  json curves = json::array();
  for (std::size_t c = 0; c < corpus.curves.size(); ++c) {
    const auto& curve = corpus.curves[c];
    const auto& ep = corpus.data.episodes[c];
    const std::string file = curve.id + ".csv";
    std::ofstream out(dir / file, std::ios::trunc);
    if (!out) throw io_error("cannot write " + (dir / file).string());
    out << "t,S,I,R,B\n";
    for (std::size_t k = 0; k < ep.length(); ++k) {
      const auto row = static_cast<Eigen::Index>(k);
      out << csv::format_double(ep.t[k]) << ',' << csv::format_double(corpus.susceptible[c][k])
          << ',' << csv::format_double(ep.states(row, 0)) << ','
          << csv::format_double(ep.states(row, 1)) << ','
          << csv::format_double(ep.forcing(row, 0)) << '\n';
    }
    if (!out) throw io_error("failed writing " + (dir / file).string());
    const auto& s = curve.schedule;
    curves.push_back({{"id", curve.id},
                      {"file", file},
                      {"S0", corpus.config.population - curve.i0 - curve.r0},
                      {"I0", curve.i0},
                      {"R0", curve.r0},
                      {"schedule",
                       {{"kind", s.kind_name()},
                        {"B0", s.b0},
                        {"slope", s.slope},
                        {"ramp_end", s.ramp_end},
                        {"amplitude", s.amplitude},
                        {"period", s.period}}}});
  }
  const auto& cfg = corpus.config;
  json manifest = {{"format", "bssanova-corpus"},
                   {"version", 1},
                   {"kind", "sir-" + corpus.kind},
                   {"time_column", "t"},
                   {"state_columns", corpus.data.state_names},
                   {"forcing_columns", corpus.data.forcing_names},
                   {"config",
                    {{"population", cfg.population},
                     {"gamma", cfg.gamma},
                     {"dt", cfg.dt},
                     {"horizon", cfg.horizon},
                     {"seed", cfg.seed}}},
                   {"curves", std::move(curves)}};
  std::ofstream out(dir / "manifest.json", std::ios::trunc);
  if (!out) throw io_error("cannot write corpus manifest in " + dir.string());
  out << manifest.dump(2) << '\n';
}

TimeSeriesData read_corpus(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw io_error("no manifest.json in " + dir.string());
  json manifest;
  try {
    in >> manifest;
  } catch (const json::exception& e) {
    throw io_error("corpus manifest is not valid JSON: " + std::string(e.what()));
  }
  TimeSeriesData data;
  try {
    data.state_names = manifest.at("state_columns").get<std::vector<std::string>>();
    data.forcing_names = manifest.at("forcing_columns").get<std::vector<std::string>>();
    const auto time_col = manifest.value("time_column", std::string("t"));
    for (const auto& c : manifest.at("curves")) {
      const auto file = c.at("file").get<std::string>();
      std::ifstream csv_in(dir / file);
      if (!csv_in) throw io_error("missing corpus file " + (dir / file).string());
      const auto table = csv::read_numeric(csv_in, (dir / file).string());
      const auto find = [&](const std::string& name) {
        auto i = table.find(name);
        if (!i) throw data_error((dir / file).string() + ": missing column '" + name + "'");
        return *i;
      };
      Episode ep;
      ep.id = c.at("id").get<std::string>();
      const auto T = static_cast<Eigen::Index>(table.rows.size());
      ep.t = table.column(find(time_col));
      ep.states.resize(T, static_cast<Eigen::Index>(data.n_states()));
      ep.forcing.resize(T, static_cast<Eigen::Index>(data.n_forcing()));
      for (std::size_t j = 0; j < data.n_states(); ++j) {
        const auto col = find(data.state_names[j]);
        for (Eigen::Index r = 0; r < T; ++r) {
          ep.states(r, static_cast<Eigen::Index>(j)) = table.rows[static_cast<std::size_t>(r)][col];
        }
      }
      for (std::size_t j = 0; j < data.n_forcing(); ++j) {
        const auto col = find(data.forcing_names[j]);
        for (Eigen::Index r = 0; r < T; ++r) {
          ep.forcing(r, static_cast<Eigen::Index>(j)) = table.rows[static_cast<std::size_t>(r)][col];
        }
      }
      data.episodes.push_back(std::move(ep));
    }
  } catch (const json::exception& e) {
    throw io_error("malformed corpus manifest: " + std::string(e.what()));
  }
  data.validate();
  return data;
}

TimeSeriesData load_cascaded_tanks(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open cascaded-tanks file: " + path.string());
  const auto table = csv::read_numeric(in, path.string());
  const auto u = table.find_any({"u", "pump", "input"});
  const auto h1 = table.find_any({"h1", "y1"});
  const auto h2 = table.find_any({"h2", "y2"});
  if (!u || !h1 || !h2) {
    throw data_error(path.string() + ": header must name columns u, h1 and h2");
  }
  const auto t_col = table.find_any({"t", "time"});
  const auto ep_col = table.find_any({"episode"});
  if (table.rows.size() < 3) throw data_error(path.string() + ": fewer than three samples");

  TimeSeriesData data;
  data.state_names = {"h1", "h2"};
  data.forcing_names = {"u"};
  std::size_t start = 0;
  while (start < table.rows.size()) {
    std::size_t end = start + 1;
    if (ep_col) {
      while (end < table.rows.size() && table.rows[end][*ep_col] == table.rows[start][*ep_col]) ++end;
    } else {
      end = table.rows.size();
    }
    Episode ep;
    ep.id = ep_col ? "episode_" + csv::format_double(table.rows[start][*ep_col]) : "tanks";
    const auto T = static_cast<Eigen::Index>(end - start);
    ep.states.resize(T, 2);
    ep.forcing.resize(T, 1);
    for (std::size_t k = start; k < end; ++k) {
      const auto r = static_cast<Eigen::Index>(k - start);
      ep.t.push_back(t_col ? table.rows[k][*t_col] : static_cast<double>(k - start));
      ep.states(r, 0) = table.rows[k][*h1];
      ep.states(r, 1) = table.rows[k][*h2];
      ep.forcing(r, 0) = table.rows[k][*u];
    }
    data.episodes.push_back(std::move(ep));
    start = end;
  }
  data.validate();
  return data;
}

std::vector<Fold> kfold(std::size_t n, const FoldSpec& spec) {
  if (spec.k < 2) throw invalid_argument("k-fold needs k >= 2");
  if (n < spec.k) {
    throw invalid_argument("cannot split " + std::to_string(n) + " samples into " +
                           std::to_string(spec.k) + " folds");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (spec.shuffle) {
    Rng rng(spec.seed);
    std::shuffle(order.begin(), order.end(), rng);
  }
  std::vector<Fold> folds(spec.k);
  std::size_t begin = 0;
  for (std::size_t f = 0; f < spec.k; ++f) {
    const std::size_t size = n / spec.k + (f < n % spec.k ? 1 : 0);
    std::vector<bool> in_test(n, false);
    for (std::size_t i = begin; i < begin + size; ++i) {
      folds[f].test.push_back(order[i]);
      in_test[order[i]] = true;
    }
    std::sort(folds[f].test.begin(), folds[f].test.end());
    for (std::size_t i = 0; i < n; ++i) {
      if (!in_test[i]) folds[f].train.push_back(i);
    }
    begin += size;
  }
  return folds;
}

}  // namespace bssanova
