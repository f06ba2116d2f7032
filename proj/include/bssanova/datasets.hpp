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

#include "bssanova/timeseries.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace bssanova {

struct SIRConfig {
  double population = 1000.0;
  double gamma = 0.5;
  double dt = 0.01;
  double horizon = 10.0;
  std::uint64_t seed = 7;

  void validate() const;
};

struct SIRRates {
  double ds = 0.0;
  double di = 0.0;
  double dr = 0.0;
};

/// S' = -B I S / N, I' = B I S / N - gamma I, R' = gamma I.
SIRRates sir_rhs(double s, double i, double r, double transmissibility, const SIRConfig& cfg);

enum class ScheduleKind { Constant, Ramp, Sinusoid };

/// Transmissibility schedule B(t).
struct Schedule {
  ScheduleKind kind = ScheduleKind::Constant;
  double b0 = 0.0;
  double slope = 0.0;      // ramp
  double ramp_end = 4.0;   // ramp levels off here
  double amplitude = 0.0;  // sinusoid
  double period = 1.0;

  double operator()(double t) const noexcept;
  std::string kind_name() const;
};

struct SIRCurve {
  std::string id;
  double i0 = 0.0;
  double r0 = 0.0;
  Schedule schedule;
};

/// Simulated curves: states (I, R), forcing (B); S = N - I - R is kept
/// alongside for export.
struct SIRCorpus {
  SIRConfig config;
  std::string kind;  // "train" or "test"
  std::vector<SIRCurve> curves;
  TimeSeriesData data;
  std::vector<std::vector<double>> susceptible;  // per episode
};

/// Stratified (I0, R0) design shared by the training and test sets.
std::vector<std::pair<double, double>> sir_initial_condition_grid();

/// Fixed-B curves: B in {0.5, 2.2, ..., 9.0}, 58 curves in total.
SIRCorpus generate_sir_training(const SIRConfig& cfg);
/// 24 curves with time-varying B(t): ramps and sinusoids around B0 in
/// {1.35, 4.75, 8.15}.
SIRCorpus generate_sir_test(const SIRConfig& cfg);

/// One RK4-simulated SIR curve sampled every cfg.dt over cfg.horizon.
Episode simulate_sir(const SIRCurve& curve, const SIRConfig& cfg, std::vector<double>* susceptible);

/// Writes one CSV per curve (t,S,I,R,B) and manifest.json.
void write_sir_corpus(const SIRCorpus& corpus, const std::filesystem::path& dir);

/// Reads any corpus directory written by this library (manifest.json plus
/// one CSV per episode).
TimeSeriesData read_corpus(const std::filesystem::path& dir);

/// Cascaded-tanks CSV with a header naming u, h1, h2 and optionally t/time
/// and episode. Without a time column samples are spaced by 1.
TimeSeriesData load_cascaded_tanks(const std::filesystem::path& path);

struct FoldSpec {
  std::size_t k = 5;
  bool shuffle = false;
  std::uint64_t seed = 0;
};

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Contiguous test blocks (or blocks of a seeded permutation when shuffled)
/// whose sizes differ by at most one.
std::vector<Fold> kfold(std::size_t n, const FoldSpec& spec);

}  // namespace bssanova
