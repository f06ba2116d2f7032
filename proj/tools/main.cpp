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

// bssanova: command-line front end to the BSS-ANOVA library.

#include "cli_support.hpp"
#include "commands.hpp"

#include <iostream>

#include "CLI11.hpp"

int main(int argc, char** argv) {
  CLI::App app{"BSS-ANOVA Gaussian process regression and system identification"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(bss_version()));

  cli::CommonFlags flags;
  cli::CommandOptions opts;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config, "JSON config file; flags override its values");
    sub->add_option("--seed", flags.seed, "root seed");
    sub->add_option("--out", flags.out, "output directory");
    sub->add_flag("--uncertainty", flags.uncertainty, "also produce 95% bands from posterior draws");
    sub->add_option("--criterion", flags.criterion, "bic or aic")->check(CLI::IsMember({"bic", "aic"}));
    sub->add_option("--tolerance", flags.tolerance, "substages without improvement before stopping");
    sub->add_option("--max-order", flags.max_order, "largest interaction order")->check(CLI::Range(1, 3));
    sub->add_option("--draws", flags.draws, "Gibbs sweeps including burn-in");
    sub->add_option("--burn-in", flags.burn_in, "discarded leading sweeps");
    sub->add_option("--skip-initial", flags.skip_initial, "samples dropped before scoring trajectories");
    sub->add_flag("-v,--verbose", flags.verbose, "progress logging on stderr");
  };

  auto* basis = app.add_subcommand("basis", "precompute the KL basis and write it out");
  add_common(basis);
  basis->add_option("--n-basis", opts.n_basis, "number of basis functions");
  basis->add_option("--grid-size", opts.grid_size, "Nystrom grid size");

  auto* fit = app.add_subcommand("fit", "forward selection and Gibbs fit on a CSV file");
  add_common(fit);
  fit->add_option("--input", opts.input, "training CSV");
  fit->add_option("--target", opts.target, "target column");
  fit->add_option("--inputs", opts.inputs, "input columns (default: all but the target)");

  auto* predict = app.add_subcommand("predict", "predict with a saved model");
  add_common(predict);
  predict->add_option("--model", opts.model, "model JSON");
  predict->add_option("--input", opts.input, "CSV with the model's input columns");
  predict->add_option("--curves", opts.curves, "posterior curves behind the bands");

  auto* sysid = app.add_subcommand("sysid", "identify and evaluate a dynamic system");
  add_common(sysid);
  sysid->add_option("--system", opts.system, "sir, tanks or corpus")
      ->check(CLI::IsMember({"sir", "tanks", "corpus"}));
  sysid->add_option("--data", opts.data, "corpus root (sir) or CSV file (tanks)");
  sysid->add_option("--train", opts.train, "training corpus directory (corpus)");
  sysid->add_option("--test", opts.test, "test corpus directory (corpus)");
  sysid->add_option("--folds", opts.folds, "cross-validation folds (tanks)");
  sysid->add_option("--curves", opts.curves, "posterior curves behind the bands");

  auto* gen = app.add_subcommand("generate-sir", "simulate the SIR training and test corpora");
  add_common(gen);

  auto* bench = app.add_subcommand("bench-scaling", "time design-matrix construction and Gibbs fits");
  add_common(bench);
  bench->add_option("--sizes", opts.sizes, "sample counts");
  bench->add_option("--terms", opts.terms, "terms at fixed P");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kOk : cli::kUsage;
  }

  bss_set_log_level(flags.verbose ? BSS_LOG_INFO : BSS_LOG_WARN);
  try {
    if (*basis) return cli::run_basis(flags, opts);
    if (*fit) return cli::run_fit(flags, opts);
    if (*predict) return cli::run_predict(flags, opts);
    if (*sysid) return cli::run_sysid(flags, opts);
    if (*gen) return cli::run_generate_sir(flags, opts);
    if (*bench) return cli::run_bench_scaling(flags, opts);
  } catch (const cli::Failure& f) {
    std::cerr << "error: " << f.message << '\n';
    return f.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kNumerical;
  }
  return cli::kUsage;
}
