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

#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>
#include <random>

namespace cli {

namespace {

struct Common {
  std::uint64_t seed = 0;
  std::string out;
  bool uncertainty = false;
  std::size_t skip_initial = 0;
};

Common resolve_common(Resolver& r, const CommonFlags& f, const std::string& default_out,
                      std::size_t default_skip = 0) {
  Common c;
  c.out = default_out;
  c.skip_initial = default_skip;
  r.get("seed", c.seed);
  r.get("out", c.out);
  r.get("uncertainty", c.uncertainty);
  r.get("skip_initial", c.skip_initial);
  if (f.seed) c.seed = *f.seed;
  if (f.out) c.out = *f.out;
  if (f.uncertainty) c.uncertainty = true;
  if (f.skip_initial) {
    if (*f.skip_initial < 0) r.error("--skip-initial must be >= 0");
    else c.skip_initial = static_cast<std::size_t>(*f.skip_initial);
  }
  if (c.out.empty()) r.error("output directory must not be empty");
  return c;
}

template <typename T>
void resolve(Resolver& r, const std::string& key, const std::optional<T>& flag, T& target) {
  r.get(key, target);
  if (flag) target = *flag;
}

ordered_json manifest(const std::string& command, const Common& common, ordered_json config) {
  ordered_json m;
  m["command"] = command;
  m["library_version"] = bss_version();
  m["seed"] = common.seed;
  m["config"] = std::move(config);
  return m;
}

std::vector<double> row_major(const csv::Table& table, const std::vector<std::size_t>& cols) {
  std::vector<double> out;
  out.reserve(table.rows.size() * cols.size());
  for (const auto& row : table.rows) {
    for (auto c : cols) out.push_back(row[c]);
  }
  return out;
}

void write_csv_rows(const std::filesystem::path& path, const std::vector<std::string>& header,
                    const std::vector<std::vector<double>>& columns) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Failure{kData, "cannot write " + path.string()};
  for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << csv::quote(header[j]);
  out << '\n';
  const std::size_t n = columns.empty() ? 0 : columns.front().size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < columns.size(); ++j) {
      out << (j ? "," : "") << csv::format_double(columns[j][i]);
    }
    out << '\n';
  }
  if (!out) throw Failure{kData, "failed writing " + path.string()};
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
  if (v.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

Series load_corpus(const std::string& dir) {
  bss_series* s = nullptr;
  check(bss_series_read_corpus(dir.c_str(), &s), "reading corpus " + dir);
  return Series(s);
}

std::vector<std::string> series_states(const bss_series* s) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < bss_series_n_states(s); ++i) out.emplace_back(bss_series_state_name(s, i));
  return out;
}

}  // namespace

int run_basis(const CommonFlags& flags, const CommandOptions& opts) {
  Resolver r = Resolver::from_path(flags.config);
  const Common common = resolve_common(r, flags, "basis_out");
  std::size_t n_basis = 25;
  std::size_t grid_size = 501;
  resolve(r, "n_basis", opts.n_basis, n_basis);
  resolve(r, "grid_size", opts.grid_size, grid_size);
  if (n_basis < 1) r.error("n_basis must be >= 1");
  if (grid_size < 3) r.error("grid_size must be >= 3");
  r.finish();

  const auto dir = prepare_out(common.out);
  const Stopwatch clock;
  bss_basis* raw = nullptr;
  check(bss_basis_create(n_basis, grid_size, &raw), "building basis");
  const Basis basis(raw);
  const double seconds = clock.seconds();
  check(bss_basis_save_cache(basis.get(), (dir / "basis.bin").string().c_str()), "writing basis cache");

  const std::size_t n = bss_basis_size(basis.get());
  std::vector<double> eig(n);
  check(bss_basis_eigenvalues(basis.get(), eig.data()), "reading eigenvalues");
  std::vector<double> k(n);
  std::iota(k.begin(), k.end(), 1.0);
  write_csv_rows(dir / "eigenvalues.csv", {"k", "eigenvalue"}, {k, eig});

  std::vector<double> x(grid_size);
  for (std::size_t i = 0; i < grid_size; ++i) {
    x[i] = i + 1 == grid_size ? 1.0 : static_cast<double>(i) / static_cast<double>(grid_size - 1);
  }
  std::vector<std::string> header{"x"};
  std::vector<std::vector<double>> cols{x};
  for (std::size_t j = 1; j <= n; ++j) {
    std::vector<double> v(grid_size);
    check(bss_basis_eval(basis.get(), j, x.data(), grid_size, v.data()), "evaluating basis");
    header.push_back("phi_" + std::to_string(j));
    cols.push_back(std::move(v));
  }
  write_csv_rows(dir / "basis.csv", header, cols);

  ordered_json m = manifest("basis", common, {{"n_basis", n_basis}, {"grid_size", grid_size}, {"out", common.out}});
  m["results"] = {{"n_basis", n}, {"largest_eigenvalue", eig.front()}, {"smallest_eigenvalue", eig.back()}};
  m["outputs"] = {"basis.bin", "eigenvalues.csv", "basis.csv"};
  m["timings_seconds"] = {{"decomposition", seconds}};
  write_json(dir / "manifest.json", m);
  std::cout << "basis: " << n << " functions on a " << grid_size << "-point grid -> " << common.out << '\n';
  return kOk;
}

int run_fit(const CommonFlags& flags, const CommandOptions& opts) {
  Resolver r = Resolver::from_path(flags.config);
  const Common common = resolve_common(r, flags, "fit_out");
  std::string input;
  std::string target;
  std::vector<std::string> inputs;
  resolve(r, "input", opts.input, input);
  resolve(r, "target", opts.target, target);
  r.get("inputs", inputs);
  if (!opts.inputs.empty()) inputs = opts.inputs;
  bss_selection_config cfg;
  bss_selection_config_default(&cfg);
  read_selection(r, r.file(), "", cfg);
  apply_flags(flags, r, cfg);
  cfg.hyper.seed = derive_seed(common.seed, 0);
  validate_selection(r, cfg, "");
  if (input.empty()) r.error("no training CSV given (--input or config key 'input')");
  if (target.empty()) r.error("no target column given (--target or config key 'target')");
  r.finish();

  const csv::Table table = read_table(input);
  const auto t_col = table.find(target);
  if (!t_col) throw Failure{kUsage, "target column '" + target + "' not found in " + input};
  std::vector<std::size_t> cols;
  if (inputs.empty()) {
    for (std::size_t j = 0; j < table.header.size(); ++j) {
      if (j != *t_col) {
        cols.push_back(j);
        inputs.push_back(table.header[j]);
      }
    }
  } else {
    for (const auto& name : inputs) {
      const auto c = table.find(name);
      if (!c) throw Failure{kUsage, "input column '" + name + "' not found in " + input};
      cols.push_back(*c);
    }
  }
  if (cols.empty()) throw Failure{kUsage, "no input columns besides the target"};
  const std::vector<double> x = row_major(table, cols);
  const std::vector<double> z = table.column(*t_col);

  const auto dir = prepare_out(common.out);
  const Stopwatch clock;
  bss_model* raw = nullptr;
  check(bss_model_fit(x.data(), z.size(), cols.size(), z.data(), &cfg, &raw), "fitting " + target);
  const Model model(raw);
  const double seconds = clock.seconds();

  std::vector<const char*> names;
  for (const auto& n : inputs) names.push_back(n.c_str());
  check(bss_model_set_names(model.get(), names.data(), names.size(), target.c_str()), "naming model");
  check(bss_model_save(model.get(), (dir / "model.json").string().c_str(), 1), "writing model");
  check(bss_model_write_trace(model.get(), (dir / "trace.csv").string().c_str()), "writing trace");

  double criterion = 0.0;
  check(bss_model_criterion(model.get(), &criterion), "reading criterion");
  ordered_json config = {{"input", input}, {"target", target}, {"inputs", inputs}, {"out", common.out},
                         {"selection", to_json(cfg)}};
  ordered_json m = manifest("fit", common, std::move(config));
  m["seeds"] = {{"gibbs", cfg.hyper.seed}};
  m["results"] = {{"n_samples", z.size()},
                  {"n_terms", bss_model_n_terms(model.get())},
                  {"criterion", criterion_name(cfg.criterion)},
                  {"criterion_value", number(criterion)}};
  m["outputs"] = {"model.json", "trace.csv"};
  m["timings_seconds"] = {{"fit", seconds}};
  write_json(dir / "manifest.json", m);
  std::cout << "fit: " << target << " -> " << bss_model_n_terms(model.get()) << " terms, "
            << criterion_name(cfg.criterion) << " " << criterion << '\n';
  return kOk;
}

int run_predict(const CommonFlags& flags, const CommandOptions& opts) {
  Resolver r = Resolver::from_path(flags.config);
  const Common common = resolve_common(r, flags, "predict_out");
  std::string model_path;
  std::string input;
  std::size_t curves = 40;
  resolve(r, "model", opts.model, model_path);
  resolve(r, "input", opts.input, input);
  resolve(r, "curves", opts.curves, curves);
  if (model_path.empty()) r.error("no model given (--model or config key 'model')");
  if (input.empty()) r.error("no input CSV given (--input or config key 'input')");
  if (curves < 1) r.error("curves must be >= 1");
  r.finish();

  bss_model* raw = nullptr;
  check(bss_model_load(model_path.c_str(), &raw), "loading model");
  const Model model(raw);
  const std::size_t d = bss_model_n_inputs(model.get());
  const csv::Table table = read_table(input);

  std::vector<std::size_t> cols;
  for (std::size_t j = 0; j < d; ++j) {
    const std::string name = bss_model_input_name(model.get(), j);
    const auto c = name.empty() ? std::nullopt : table.find(name);
    if (!c) break;
    cols.push_back(*c);
  }
  if (cols.size() != d) {
    if (table.header.size() != d) {
      throw Failure{kUsage, "model expects " + std::to_string(d) + " inputs but " + input + " has " +
                                std::to_string(table.header.size()) + " columns"};
    }
    cols.resize(d);
    std::iota(cols.begin(), cols.end(), std::size_t{0});
  }
  const std::vector<double> x = row_major(table, cols);
  const std::size_t n = table.rows.size();

  const auto dir = prepare_out(common.out);
  const Stopwatch clock;
  std::vector<double> mean(n), lower(n), upper(n);
  if (common.uncertainty) {
    check(bss_model_predict_bounds(model.get(), x.data(), n, d, curves, mean.data(), lower.data(), upper.data()),
          "predicting with bounds");
    write_csv_rows(dir / "predictions.csv", {"mean", "lower", "upper"}, {mean, lower, upper});
  } else {
    check(bss_model_predict_mean(model.get(), x.data(), n, d, mean.data()), "predicting");
    write_csv_rows(dir / "predictions.csv", {"mean"}, {mean});
  }

  ordered_json m = manifest("predict", common,
                            {{"model", model_path}, {"input", input}, {"out", common.out},
                             {"uncertainty", common.uncertainty}, {"curves", curves}});
  m["results"] = {{"n_rows", n}, {"n_terms", bss_model_n_terms(model.get())}};
  m["outputs"] = {"predictions.csv"};
  m["timings_seconds"] = {{"predict", clock.seconds()}};
  write_json(dir / "manifest.json", m);
  std::cout << "predict: " << n << " rows -> " << (dir / "predictions.csv").string() << '\n';
  return kOk;
}

int run_generate_sir(const CommonFlags& flags, const CommandOptions&) {
  Resolver r = Resolver::from_path(flags.config);
  Common common = resolve_common(r, flags, "sir_corpus");
  bss_sir_config sir;
  bss_sir_config_default(&sir);
  if (const json* s = r.object("sir")) {
    r.get_from(*s, "population", "sir.population", sir.population);
    r.get_from(*s, "gamma", "sir.gamma", sir.gamma);
    r.get_from(*s, "dt", "sir.dt", sir.dt);
    r.get_from(*s, "horizon", "sir.horizon", sir.horizon);
  }
  sir.seed = common.seed;
  r.finish();

  const auto dir = prepare_out(common.out);
  const Stopwatch clock;
  ordered_json corpora = ordered_json::object();
  for (int test = 0; test <= 1; ++test) {
    bss_series* raw = nullptr;
    check(bss_series_generate_sir(&sir, test, &raw), "simulating SIR corpus");
    const Series series(raw);
    const std::string sub = test ? "test" : "train";
    check(bss_series_write_corpus(series.get(), (dir / sub).string().c_str()), "writing corpus");
    ordered_json curves = ordered_json::array();
    for (std::size_t e = 0; e < bss_series_n_episodes(series.get()); ++e) {
      curves.push_back({{"id", bss_series_episode_id(series.get(), e)},
                        {"schedule", ordered_json::parse(bss_series_episode_schedule(series.get(), e))}});
    }
    corpora[sub] = {{"n_curves", bss_series_n_episodes(series.get())},
                    {"n_samples", bss_series_total_samples(series.get())},
                    {"curves", std::move(curves)}};
  }
  ordered_json m = manifest("generate-sir", common,
                            {{"out", common.out},
                             {"sir",
                              {{"population", sir.population},
                               {"gamma", sir.gamma},
                               {"dt", sir.dt},
                               {"horizon", sir.horizon}}}});
  m["seeds"] = {{"sir", sir.seed}};
  m["results"] = corpora;
  m["outputs"] = {"train/manifest.json", "test/manifest.json"};
  m["timings_seconds"] = {{"simulate", clock.seconds()}};
  write_json(dir / "manifest.json", m);
  std::cout << "generate-sir: " << corpora["train"]["n_curves"] << " training and "
            << corpora["test"]["n_curves"] << " test curves -> " << common.out << '\n';
  return kOk;
}

namespace {

/// Per-state selection configs: system defaults, then top-level keys, then
/// the "states" array, then flags.
std::vector<bss_selection_config> state_configs(Resolver& r, const CommonFlags& flags,
                                                std::vector<bss_selection_config> configs,
                                                std::uint64_t root_seed) {
  for (auto& c : configs) read_selection(r, r.file(), "", c);
  if (const json* states = r.object("states")) {
    if (!states->is_array() || states->size() != configs.size()) {
      r.error("config key 'states' must be an array with one object per state (" +
              std::to_string(configs.size()) + ")");
    } else {
      for (std::size_t i = 0; i < configs.size(); ++i) {
        const json& s = (*states)[i];
        const std::string prefix = "states[" + std::to_string(i) + "].";
        if (!s.is_object()) {
          r.error("config key 'states[" + std::to_string(i) + "]' must be an object");
          continue;
        }
        for (const auto& [key, value] : s.items()) {
          static const std::set<std::string> allowed{"name", "criterion", "tolerance", "max_order",
                                                     "max_stage", "basis_ceiling", "grid_size",
                                                     "draws", "burn_in", "hyper"};
          if (!allowed.count(key)) r.error("unknown config key '" + prefix + key + "'");
        }
        read_selection(r, s, prefix, configs[i]);
      }
    }
  }
  for (std::size_t i = 0; i < configs.size(); ++i) {
    apply_flags(flags, r, configs[i]);
    configs[i].hyper.seed = derive_seed(root_seed, i);
    validate_selection(r, configs[i], "state " + std::to_string(i) + ": ");
  }
  return configs;
}

bss_selection_config make_config(double a, double b, double a_tau, double b_tau, int tolerance,
                                 bss_criterion criterion) {
  bss_selection_config c;
  bss_selection_config_default(&c);
  c.hyper.a = a;
  c.hyper.b = b;
  c.hyper.a_tau = a_tau;
  c.hyper.b_tau = b_tau;
  c.tolerance = tolerance;
  c.criterion = criterion;
  return c;
}

ordered_json per_state(const std::vector<std::string>& names, const std::vector<double>& v) {
  ordered_json j = ordered_json::object();
  for (std::size_t i = 0; i < names.size(); ++i) j[names[i]] = number(v[i]);
  return j;
}

/// Fits every state, replays the test episodes and writes dynamics.json,
/// trajectories/ and report.json. Returns the report.
ordered_json fit_and_evaluate(const bss_series* train, const bss_series* test,
                              const std::vector<bss_selection_config>& configs, const Common& common,
                              std::size_t curves, const std::filesystem::path& dir, ordered_json& timings) {
  const auto names = series_states(train);
  Stopwatch clock;
  bss_dynamics* raw = nullptr;
  check(bss_dynamics_fit(train, configs.data(), configs.size(), &raw), "fitting dynamics");
  const Dynamics dyn(raw);
  timings["fit"] = clock.seconds();
  check(bss_dynamics_save(dyn.get(), (dir / "dynamics.json").string().c_str()), "writing dynamics");

  std::vector<double> n_terms;
  for (std::size_t i = 0; i < names.size(); ++i) {
    bss_model* m = nullptr;
    check(bss_dynamics_state_model(dyn.get(), i, &m), "reading state model");
    const Model owned(m);
    n_terms.push_back(static_cast<double>(bss_model_n_terms(m)));
    check(bss_model_write_trace(m, (dir / ("trace_" + names[i] + ".csv")).string().c_str()),
          "writing selection trace");
  }

  const Stopwatch integrate_clock;
  bss_evaluation* ev_raw = nullptr;
  check(bss_dynamics_evaluate(dyn.get(), test, common.skip_initial, common.uncertainty ? 1 : 0, curves,
                              (dir / "trajectories").string().c_str(), &ev_raw),
        "evaluating test episodes");
  const Evaluation ev(ev_raw);
  timings["integrate"] = integrate_clock.seconds();

  const std::size_t d = names.size();
  ordered_json episodes = ordered_json::array();
  std::vector<std::vector<double>> mae_all(d), mape_all(d);
  std::size_t failed = 0;
  for (std::size_t e = 0; e < bss_evaluation_n_episodes(ev.get()); ++e) {
    ordered_json entry = {{"id", bss_evaluation_episode_id(ev.get(), e)}};
    const std::string schedule = bss_series_episode_schedule(test, e);
    if (!schedule.empty()) entry["schedule"] = ordered_json::parse(schedule);
    const std::string error = bss_evaluation_episode_error(ev.get(), e);
    if (!error.empty()) {
      entry["error"] = error;
      ++failed;
    } else {
      std::vector<double> mae(d), mape(d);
      check(bss_evaluation_metrics(ev.get(), e, mae.data(), mape.data()), "reading metrics");
      entry["mae"] = per_state(names, mae);
      entry["mape"] = per_state(names, mape);
      for (std::size_t i = 0; i < d; ++i) {
        mae_all[i].push_back(mae[i]);
        if (std::isfinite(mape[i])) mape_all[i].push_back(mape[i]);
      }
    }
    episodes.push_back(std::move(entry));
  }
  std::vector<double> mae_mean(d), mape_mean(d), mape_sd(d);
  for (std::size_t i = 0; i < d; ++i) {
    mae_mean[i] = mean_of(mae_all[i]);
    mape_mean[i] = mean_of(mape_all[i]);
    mape_sd[i] = sd_of(mape_all[i]);
  }
  ordered_json report;
  report["states"] = names;
  report["n_terms"] = per_state(names, n_terms);
  report["skip_initial"] = common.skip_initial;
  report["summary"] = {{"n_episodes", episodes.size()},
                       {"n_failed", failed},
                       {"mae_mean", per_state(names, mae_mean)},
                       {"mape_mean", per_state(names, mape_mean)},
                       {"mape_sd", per_state(names, mape_sd)}};
  report["episodes"] = std::move(episodes);
  write_json(dir / "report.json", report);
  return report;
}

}  // namespace

int run_sysid(const CommonFlags& flags, const CommandOptions& opts) {
  Resolver r = Resolver::from_path(flags.config);
  std::string system;
  resolve(r, "system", opts.system, system);
  const bool tanks = system == "tanks";
  Common common = resolve_common(r, flags, "sysid_out", tanks ? 50 : 0);
  std::string data, train_dir, test_dir;
  std::size_t folds = 5;
  std::size_t curves = 40;
  resolve(r, "data", opts.data, data);
  resolve(r, "train", opts.train, train_dir);
  resolve(r, "test", opts.test, test_dir);
  resolve(r, "folds", opts.folds, folds);
  resolve(r, "curves", opts.curves, curves);
  bss_sir_config sir;
  bss_sir_config_default(&sir);
  if (const json* s = r.object("sir")) {
    r.get_from(*s, "population", "sir.population", sir.population);
    r.get_from(*s, "gamma", "sir.gamma", sir.gamma);
    r.get_from(*s, "dt", "sir.dt", sir.dt);
    r.get_from(*s, "horizon", "sir.horizon", sir.horizon);
  }
  sir.seed = derive_seed(common.seed, 100);

  std::vector<bss_selection_config> defaults;
  if (system == "sir") {
    defaults = {make_config(4.0, 1.25, 4.0, 72.1, 6, BSS_BIC), make_config(4.0, 20.0, 4.0, 8.95, 6, BSS_BIC)};
  } else if (tanks) {
    defaults = {make_config(1000.0, 1.001, 4.0, 55.0, 3, BSS_AIC),
                make_config(1000.0, 1.001, 4.0, 69.1, 5, BSS_AIC)};
  } else if (system == "corpus") {
    if (train_dir.empty() || test_dir.empty()) r.error("system 'corpus' needs train and test directories");
  } else {
    r.error("system must be one of sir, tanks, corpus (--system or config key 'system')");
  }
  if (tanks && data.empty()) r.error("system 'tanks' needs the benchmark CSV (--data or config key 'data')");
  if (tanks && folds < 2) r.error("folds must be >= 2");
  if (curves < 1) r.error("curves must be >= 1");

  Series train, test;
  if (system == "corpus" && !train_dir.empty() && !test_dir.empty()) {
    train = load_corpus(train_dir);
    test = load_corpus(test_dir);
    defaults.assign(bss_series_n_states(train.get()), bss_selection_config{});
    for (auto& c : defaults) bss_selection_config_default(&c);
  }
  const auto configs = state_configs(r, flags, defaults, common.seed);
  r.finish();

  const auto dir = prepare_out(common.out);
  ordered_json timings = ordered_json::object();
  ordered_json config = {{"system", system}, {"out", common.out}, {"skip_initial", common.skip_initial},
                         {"uncertainty", common.uncertainty}, {"curves", curves}};
  ordered_json seeds = ordered_json::object();
  ordered_json outputs = {"dynamics.json", "report.json", "trajectories/"};
  ordered_json results;

  if (system == "sir") {
    const Stopwatch clock;
    if (!data.empty()) {
      train = load_corpus((std::filesystem::path(data) / "train").string());
      test = load_corpus((std::filesystem::path(data) / "test").string());
      config["data"] = data;
    } else {
      bss_series* raw = nullptr;
      check(bss_series_generate_sir(&sir, 0, &raw), "simulating training corpus");
      train.reset(raw);
      check(bss_series_generate_sir(&sir, 1, &raw), "simulating test corpus");
      test.reset(raw);
      seeds["sir"] = sir.seed;
      config["sir"] = {{"population", sir.population}, {"gamma", sir.gamma}, {"dt", sir.dt}, {"horizon", sir.horizon}};
    }
    timings["data"] = clock.seconds();
  } else if (system == "corpus") {
    config["train"] = train_dir;
    config["test"] = test_dir;
  }

  if (tanks) {
    config["data"] = data;
    config["folds"] = folds;
    bss_series* raw = nullptr;
    check(bss_series_load_tanks(data.c_str(), &raw), "loading " + data);
    const Series series(raw);
    const auto names = series_states(series.get());
    Stopwatch clock;
    bss_crossval* cv_raw = nullptr;
    check(bss_crossval_run(series.get(), configs.data(), configs.size(), folds, 0, 0, 1, common.skip_initial, &cv_raw),
          "cross-validating");
    const CrossVal cv(cv_raw);
    timings["crossval"] = clock.seconds();
    ordered_json fold_rows = ordered_json::array();
    std::vector<std::vector<double>> deriv(names.size()), series_mae(names.size());
    for (std::size_t f = 0; f < bss_crossval_n_folds(cv.get()); ++f) {
      ordered_json row = {{"fold", f + 1}};
      const std::string error = bss_crossval_fold_error(cv.get(), f);
      if (!error.empty()) row["error"] = error;
      const auto values = [&](bss_fold_value which, std::vector<std::vector<double>>* sink) {
        std::vector<double> v(names.size(), std::numeric_limits<double>::quiet_NaN());
        for (std::size_t i = 0; i < names.size(); ++i) {
          if (bss_crossval_value(cv.get(), f, i, which, &v[i]) == BSS_OK && sink && std::isfinite(v[i])) {
            (*sink)[i].push_back(v[i]);
          }
        }
        return per_state(names, v);
      };
      row["derivative_mae"] = values(BSS_FOLD_DERIVATIVE_MAE, &deriv);
      row["series_mae"] = values(BSS_FOLD_SERIES_MAE, &series_mae);
      row["series_mape"] = values(BSS_FOLD_SERIES_MAPE, nullptr);
      row["n_terms"] = values(BSS_FOLD_N_TERMS, nullptr);
      fold_rows.push_back(std::move(row));
    }
    std::vector<double> d_mean, s_mean;
    for (std::size_t i = 0; i < names.size(); ++i) {
      d_mean.push_back(mean_of(deriv[i]));
      s_mean.push_back(mean_of(series_mae[i]));
    }
    ordered_json cv_report = {{"states", names},
                              {"folds", folds},
                              {"skip_initial", common.skip_initial},
                              {"derivative_mae_mean", per_state(names, d_mean)},
                              {"series_mae_mean", per_state(names, s_mean)},
                              {"per_fold", std::move(fold_rows)}};
    write_json(dir / "crossval.json", cv_report);
    outputs.push_back("crossval.json");
    // Full-data fit replayed over the whole record.
    results = fit_and_evaluate(series.get(), series.get(), configs, common, curves, dir, timings)["summary"];
    results["crossval"] = {{"derivative_mae_mean", cv_report["derivative_mae_mean"]},
                           {"series_mae_mean", cv_report["series_mae_mean"]}};
  } else {
    const ordered_json report = fit_and_evaluate(train.get(), test.get(), configs, common, curves, dir, timings);
    results = report["summary"];
    results["n_terms"] = report["n_terms"];
  }

  ordered_json state_cfg = ordered_json::array();
  for (std::size_t i = 0; i < configs.size(); ++i) {
    state_cfg.push_back(to_json(configs[i]));
    seeds["state_" + std::to_string(i)] = configs[i].hyper.seed;
  }
  config["states"] = std::move(state_cfg);
  ordered_json m = manifest("sysid", common, std::move(config));
  m["seeds"] = std::move(seeds);
  m["results"] = results;
  m["outputs"] = std::move(outputs);
  m["timings_seconds"] = std::move(timings);
  write_json(dir / "manifest.json", m);
  std::cout << "sysid: " << system << " -> " << (dir / "report.json").string() << '\n';
  std::cout << results.dump(2) << '\n';
  return kOk;
}

int run_bench_scaling(const CommonFlags& flags, const CommandOptions& opts) {
  Resolver r = Resolver::from_path(flags.config);
  const Common common = resolve_common(r, flags, "bench_out");
  std::vector<std::size_t> sizes{2000, 4000, 8000, 16000};
  std::size_t terms = 50;
  std::size_t repeats = 3;
  r.get("sizes", sizes);
  if (!opts.sizes.empty()) sizes = opts.sizes;
  resolve(r, "terms", opts.terms, terms);
  r.get("repeats", repeats);
  bss_hyperparameters hyper;
  bss_hyperparameters_default(&hyper);
  hyper.n_draws = 200;
  hyper.burn_in = 100;
  if (flags.draws) hyper.n_draws = static_cast<std::uint64_t>(*flags.draws);
  if (flags.burn_in) hyper.burn_in = static_cast<std::uint64_t>(*flags.burn_in);
  hyper.seed = derive_seed(common.seed, 0);
  if (sizes.size() < 2) r.error("sizes needs at least two entries");
  if (terms < 2) r.error("terms must be >= 2");
  if (repeats < 1) r.error("repeats must be >= 1");
  if (hyper.burn_in >= hyper.n_draws) r.error("burn_in must be below draws");
  r.finish();

  // Terms cycle over the inputs with increasing basis order so no order
  // exceeds the basis size.
  constexpr std::size_t kBasis = 25;
  const std::size_t max_terms = 2 * terms;
  const std::size_t d = std::max<std::size_t>(4, (max_terms - 1 + kBasis - 1) / kBasis);
  const auto term_rows = [&](std::size_t p) {
    std::vector<int> rows(p * d, 0);
    for (std::size_t t = 1; t < p; ++t) rows[t * d + (t - 1) % d] = static_cast<int>(1 + (t - 1) / d);
    return rows;
  };
  bss_basis* raw = nullptr;
  check(bss_basis_create(kBasis, 501, &raw), "building basis");
  const Basis basis(raw);

  std::mt19937_64 rng(derive_seed(common.seed, 1));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const std::size_t n_max = *std::max_element(sizes.begin(), sizes.end());
  std::vector<double> inputs(n_max * d);
  for (auto& v : inputs) v = unif(rng);
  std::vector<double> z(n_max);
  for (std::size_t i = 0; i < n_max; ++i) z[i] = std::sin(6.0 * inputs[i * d]) + 0.1 * unif(rng);

  const auto time_design = [&](std::size_t n, std::size_t p, std::vector<double>& x) {
    const auto rows = term_rows(p);
    x.assign(n * p, 0.0);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < repeats; ++k) {
      const Stopwatch clock;
      check(bss_design_matrix(basis.get(), inputs.data(), n, d, rows.data(), p, x.data()), "building design");
      best = std::min(best, clock.seconds());
    }
    return best;
  };
  const auto time_gibbs = [&](std::size_t n, std::size_t p, const std::vector<double>& x) {
    std::vector<double> beta(p);
    const Stopwatch clock;
    check(bss_gibbs_fit(x.data(), n, p, z.data(), &hyper, BSS_BIC, beta.data(), nullptr, nullptr), "Gibbs fit");
    return clock.seconds();
  };
  const auto ratios = [](const ordered_json& rows) {
    ordered_json out = ordered_json::array();
    for (std::size_t i = 1; i < rows.size(); ++i) {
      out.push_back(rows[i]["seconds"].get<double>() / rows[i - 1]["seconds"].get<double>());
    }
    return out;
  };

  ordered_json x_by_n = ordered_json::array(), gibbs_by_n = ordered_json::array();
  std::vector<double> x;
  for (auto n : sizes) {
    const double tx = time_design(n, terms, x);
    const double tg = time_gibbs(n, terms, x);
    x_by_n.push_back({{"n", n}, {"p", terms}, {"seconds", tx}});
    gibbs_by_n.push_back({{"n", n}, {"p", terms}, {"seconds", tg}});
  }
  const std::size_t n_fixed = sizes[sizes.size() / 2];
  ordered_json x_by_p = ordered_json::array();
  for (std::size_t p : {terms / 2, terms, max_terms}) {
    x_by_p.push_back({{"n", n_fixed}, {"p", p}, {"seconds", time_design(n_fixed, p, x)}});
  }
  ordered_json report = {{"inputs", d},
                         {"repeats", repeats},
                         {"x_construction_by_n", x_by_n},
                         {"x_construction_n_ratios", ratios(x_by_n)},
                         {"x_construction_by_p", x_by_p},
                         {"x_construction_p_ratios", ratios(x_by_p)},
                         {"gibbs_by_n", gibbs_by_n},
                         {"gibbs_n_ratios", ratios(gibbs_by_n)}};
  const auto dir = prepare_out(common.out);
  write_json(dir / "report.json", report);
  ordered_json m = manifest("bench-scaling", common,
                            {{"sizes", sizes}, {"terms", terms}, {"repeats", repeats}, {"out", common.out},
                             {"gibbs", {{"draws", hyper.n_draws}, {"burn_in", hyper.burn_in}}}});
  m["seeds"] = {{"gibbs", hyper.seed}, {"data", derive_seed(common.seed, 1)}};
  m["outputs"] = {"report.json"};
  write_json(dir / "manifest.json", m);
  std::cout << report.dump(2) << '\n';
  return kOk;
}

}  // namespace cli
