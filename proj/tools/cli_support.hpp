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

// Plumbing shared by the subcommands: exit codes, handle ownership, config
// resolution (defaults, then file, then flags) and output helpers.

#include "bssanova/bssanova.h"
#include "bssanova/csv.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

namespace cli {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;
namespace csv = bssanova::csv;

enum ExitCode { kOk = 0, kUsage = 2, kData = 3, kNumerical = 4 };

struct Failure {
  int code;
  std::string message;
};

inline int exit_code_for(bss_status s) {
  switch (s) {
    case BSS_OK: return kOk;
    case BSS_ERR_INVALID_ARGUMENT:
    case BSS_ERR_DOMAIN:
    case BSS_ERR_CAPABILITY: return kUsage;
    case BSS_ERR_DATA:
    case BSS_ERR_IO: return kData;
    case BSS_ERR_NUMERICAL:
    case BSS_ERR_DIVERGENCE:
    case BSS_ERR_INTERNAL: return kNumerical;
  }
  return kNumerical;
}

inline void check(bss_status s, const std::string& context) {
  if (s != BSS_OK) {
    throw Failure{exit_code_for(s), context + ": " + bss_status_name(s) + ": " + bss_last_error()};
  }
}

template <typename T, void (*Free)(T*)>
struct HandleDeleter {
  void operator()(T* p) const { Free(p); }
};

using Model = std::unique_ptr<bss_model, HandleDeleter<bss_model, bss_model_free>>;
using Series = std::unique_ptr<bss_series, HandleDeleter<bss_series, bss_series_free>>;
using Dynamics = std::unique_ptr<bss_dynamics, HandleDeleter<bss_dynamics, bss_dynamics_free>>;
using Basis = std::unique_ptr<bss_basis, HandleDeleter<bss_basis, bss_basis_free>>;
using Evaluation = std::unique_ptr<bss_evaluation, HandleDeleter<bss_evaluation, bss_evaluation_free>>;
using CrossVal = std::unique_ptr<bss_crossval, HandleDeleter<bss_crossval, bss_crossval_free>>;

/// Flags shared by every subcommand; unset optionals leave file values alone.
struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  bool uncertainty = false;
  std::optional<std::string> criterion;
  std::optional<int> tolerance;
  std::optional<int> max_order;
  std::optional<int> draws;
  std::optional<int> burn_in;
  std::optional<int> skip_initial;
  bool verbose = false;
};

/// Reads typed keys from a JSON config object, collecting every problem so
/// they can be reported together.
class Resolver {
 public:
  explicit Resolver(json file) : file_(std::move(file)) {}

  static Resolver from_path(const std::string& path) {
    if (path.empty()) return Resolver(json::object());
    std::ifstream in(path);
    if (!in) throw Failure{kUsage, "cannot open config file " + path};
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw Failure{kUsage, "config file " + path + " is not valid JSON"};
    if (!j.is_object()) throw Failure{kUsage, "config file " + path + " must hold a JSON object"};
    return Resolver(std::move(j));
  }

  template <typename T>
  void get(const std::string& key, T& target) {
    get_from(file_, key, key, target);
  }

  template <typename T>
  void get_from(const json& obj, const std::string& key, const std::string& label, T& target) {
    if (&obj == &file_) known_.insert(key);
    if (!obj.contains(key)) return;
    try {
      target = obj.at(key).get<T>();
    } catch (const json::exception&) {
      errors_.push_back("config key '" + label + "' has the wrong type");
    }
  }

  const json* object(const std::string& key) {
    known_.insert(key);
    if (!file_.contains(key)) return nullptr;
    return &file_.at(key);
  }

  const json& file() const noexcept { return file_; }
  void mark(const std::string& key) { known_.insert(key); }
  void error(std::string message) { errors_.push_back(std::move(message)); }

  /// Throws a usage failure listing all accumulated errors.
  void finish() {
    for (const auto& [key, value] : file_.items()) {
      if (!known_.count(key)) errors_.push_back("unknown config key '" + key + "'");
    }
    if (errors_.empty()) return;
    std::string msg = "invalid configuration:";
    for (const auto& e : errors_) msg += "\n  - " + e;
    throw Failure{kUsage, msg};
  }

 private:
  json file_;
  std::set<std::string> known_;
  std::vector<std::string> errors_;
};

/// Per-component seed derived from the root seed (splitmix64 finalizer).
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream) {
  std::uint64_t z = root + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline const char* criterion_name(bss_criterion c) { return c == BSS_AIC ? "aic" : "bic"; }

inline ordered_json to_json(const bss_selection_config& c) {
  return {{"tolerance", c.tolerance},
          {"criterion", criterion_name(c.criterion)},
          {"max_order", c.max_interaction_order},
          {"max_stage", c.max_stage},
          {"basis_ceiling", c.basis_ceiling},
          {"grid_size", c.grid_size},
          {"hyper",
           {{"a", c.hyper.a},
            {"b", c.hyper.b},
            {"a_tau", c.hyper.a_tau},
            {"b_tau", c.hyper.b_tau},
            {"draws", c.hyper.n_draws},
            {"burn_in", c.hyper.burn_in},
            {"seed", c.hyper.seed}}}};
}

/// Applies selection-related keys of `obj` (top level or one "states" entry).
inline void read_selection(Resolver& r, const json& obj, const std::string& prefix,
                           bss_selection_config& c) {
  std::string crit;
  r.get_from(obj, "criterion", prefix + "criterion", crit);
  if (!crit.empty()) {
    if (crit == "bic") c.criterion = BSS_BIC;
    else if (crit == "aic") c.criterion = BSS_AIC;
    else r.error("config key '" + prefix + "criterion' must be \"bic\" or \"aic\"");
  }
  r.get_from(obj, "tolerance", prefix + "tolerance", c.tolerance);
  r.get_from(obj, "max_order", prefix + "max_order", c.max_interaction_order);
  r.get_from(obj, "max_stage", prefix + "max_stage", c.max_stage);
  r.get_from(obj, "basis_ceiling", prefix + "basis_ceiling", c.basis_ceiling);
  r.get_from(obj, "grid_size", prefix + "grid_size", c.grid_size);
  r.get_from(obj, "draws", prefix + "draws", c.hyper.n_draws);
  r.get_from(obj, "burn_in", prefix + "burn_in", c.hyper.burn_in);
  if (&obj == &r.file()) r.mark("hyper");
  if (obj.contains("hyper")) {
    const json& h = obj.at("hyper");
    if (!h.is_object()) {
      r.error("config key '" + prefix + "hyper' must be an object");
    } else {
      for (const auto& [key, value] : h.items()) {
        if (key != "a" && key != "b" && key != "a_tau" && key != "b_tau") {
          r.error("unknown config key '" + prefix + "hyper." + key + "'");
        }
      }
      r.get_from(h, "a", prefix + "hyper.a", c.hyper.a);
      r.get_from(h, "b", prefix + "hyper.b", c.hyper.b);
      r.get_from(h, "a_tau", prefix + "hyper.a_tau", c.hyper.a_tau);
      r.get_from(h, "b_tau", prefix + "hyper.b_tau", c.hyper.b_tau);
    }
  }
}

inline void apply_flags(const CommonFlags& f, Resolver& r, bss_selection_config& c) {
  if (f.criterion) {
    if (*f.criterion == "bic") c.criterion = BSS_BIC;
    else if (*f.criterion == "aic") c.criterion = BSS_AIC;
    else r.error("--criterion must be bic or aic");
  }
  if (f.tolerance) c.tolerance = *f.tolerance;
  if (f.max_order) c.max_interaction_order = *f.max_order;
  if (f.draws) c.hyper.n_draws = static_cast<std::uint64_t>(*f.draws);
  if (f.burn_in) c.hyper.burn_in = static_cast<std::uint64_t>(*f.burn_in);
}

/// Checks that can be made before any work starts, so they are reported
/// together with the other configuration errors.
inline void validate_selection(Resolver& r, const bss_selection_config& c, const std::string& label) {
  if (c.tolerance < 1) r.error(label + "tolerance must be >= 1");
  if (c.max_interaction_order < 1 || c.max_interaction_order > 3) {
    r.error(label + "max_order must be 1, 2 or 3");
  }
  if (c.max_stage < 1) r.error(label + "max_stage must be >= 1");
  if (!(c.hyper.a > 0) || !(c.hyper.b > 0) || !(c.hyper.a_tau > 0) || !(c.hyper.b_tau > 0)) {
    r.error(label + "hyperparameters a, b, a_tau, b_tau must be positive");
  }
  if (c.hyper.n_draws < 1 || c.hyper.burn_in >= c.hyper.n_draws) {
    r.error(label + "need draws >= 1 and burn_in < draws");
  }
}

inline std::filesystem::path prepare_out(const std::string& out) {
  std::filesystem::path dir(out);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Failure{kData, "cannot create output directory " + out + ": " + ec.message()};
  return dir;
}

inline void write_json(const std::filesystem::path& path, const ordered_json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Failure{kData, "cannot write " + path.string()};
  out << j.dump(2) << '\n';
  if (!out) throw Failure{kData, "failed writing " + path.string()};
}

inline csv::Table read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Failure{kData, "cannot open " + path};
  try {
    return csv::read_numeric(in, path);
  } catch (const std::exception& e) {
    throw Failure{kData, e.what()};
  }
}

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

/// JSON number or null for non-finite values.
inline ordered_json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

}  // namespace cli
