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

#include "cli_support.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace cli {

/// Subcommand-specific flags; unset values fall back to the config file.
struct CommandOptions {
  std::optional<std::size_t> n_basis;
  std::optional<std::size_t> grid_size;
  std::optional<std::string> input;
  std::optional<std::string> target;
  std::vector<std::string> inputs;
  std::optional<std::string> model;
  std::optional<std::size_t> curves;
  std::optional<std::string> system;
  std::optional<std::string> data;
  std::optional<std::string> train;
  std::optional<std::string> test;
  std::optional<std::size_t> folds;
  std::vector<std::size_t> sizes;
  std::optional<std::size_t> terms;
};

int run_basis(const CommonFlags& flags, const CommandOptions& opts);
int run_fit(const CommonFlags& flags, const CommandOptions& opts);
int run_predict(const CommonFlags& flags, const CommandOptions& opts);
int run_sysid(const CommonFlags& flags, const CommandOptions& opts);
int run_generate_sir(const CommonFlags& flags, const CommandOptions& opts);
int run_bench_scaling(const CommonFlags& flags, const CommandOptions& opts);

}  // namespace cli
