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

#include "bssanova/bssanova.h"

#include "bssanova/datasets.hpp"
#include "bssanova/forward_selection.hpp"
#include "bssanova/gibbs_sampler.hpp"
#include "bssanova/gp_model.hpp"
#include "bssanova/kernel_basis.hpp"
#include "bssanova/logging.hpp"
#include "bssanova/sysid.hpp"
#include "bssanova/term_design.hpp"

#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <new>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

using namespace bssanova;

struct bss_basis {
  BasisSet basis;
};

struct bss_model {
  GPModel model;
};

struct bss_series {
  TimeSeriesData data;
  std::optional<SIRCorpus> corpus;
  std::vector<std::string> schedules;  // JSON per episode, empty if unknown
};

struct bss_dynamics {
  StateSpaceModel model;
};

struct bss_trajectory {
  Trajectory traj;
};

struct bss_evaluation {
  std::vector<EpisodeEvaluation> episodes;
};

struct bss_crossval {
  std::vector<FoldResult> folds;
};

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

thread_local std::string g_last_error;

bss_status status_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return BSS_ERR_INVALID_ARGUMENT;
    case ErrorKind::Domain: return BSS_ERR_DOMAIN;
    case ErrorKind::Data: return BSS_ERR_DATA;
    case ErrorKind::Numerical: return BSS_ERR_NUMERICAL;
    case ErrorKind::Io: return BSS_ERR_IO;
    case ErrorKind::Capability: return BSS_ERR_CAPABILITY;
    case ErrorKind::Divergence: return BSS_ERR_DIVERGENCE;
  }
  return BSS_ERR_INTERNAL;
}

template <typename F>
bss_status guarded(F&& body) {
  g_last_error.clear();
  try {
    body();
    return BSS_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return BSS_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return BSS_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return BSS_ERR_INTERNAL;
  }
}

void require(const void* p, const char* name) {
  if (p == nullptr) throw invalid_argument(std::string(name) + " must not be NULL");
}

Eigen::MatrixXd matrix_from(const double* data, std::size_t rows, std::size_t cols) {
  if (rows > 0 && cols > 0) require(data, "matrix");
  if (rows == 0 || cols == 0) return Eigen::MatrixXd(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  return Eigen::Map<const RowMatrix>(data, static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

void matrix_to(const Eigen::MatrixXd& m, double* out) {
  if (out == nullptr) return;
  Eigen::Map<RowMatrix>(out, m.rows(), m.cols()) = m;
}

Hyperparameters to_cpp(const bss_hyperparameters& h) {
  Hyperparameters out;
  out.a = h.a;
  out.b = h.b;
  out.a_tau = h.a_tau;
  out.b_tau = h.b_tau;
  constexpr auto limit = static_cast<uint64_t>(std::numeric_limits<int>::max());
  if (h.n_draws > limit || h.burn_in > limit) throw invalid_argument("draw counts are too large");
  out.n_draws = static_cast<int>(h.n_draws);
  out.burn_in = static_cast<int>(h.burn_in);
  out.seed = h.seed;
  return out;
}

CriterionKind to_cpp(bss_criterion c) {
  switch (c) {
    case BSS_BIC: return CriterionKind::BIC;
    case BSS_AIC: return CriterionKind::AIC;
  }
  throw invalid_argument("unknown criterion code " + std::to_string(static_cast<int>(c)));
}

SelectionConfig to_cpp(const bss_selection_config& c) {
  SelectionConfig out;
  out.tolerance = c.tolerance;
  out.criterion = to_cpp(c.criterion);
  out.max_interaction_order = c.max_interaction_order;
  out.max_stage = c.max_stage;
  out.basis_ceiling = c.basis_ceiling;
  out.grid_size = c.grid_size;
  out.hyper = to_cpp(c.hyper);
  return out;
}

std::vector<SelectionConfig> configs_from(const bss_selection_config* configs, std::size_t n) {
  require(configs, "configs");
  std::vector<SelectionConfig> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(to_cpp(configs[i]));
  return out;
}

SIRConfig to_cpp(const bss_sir_config& c) {
  SIRConfig out;
  out.population = c.population;
  out.gamma = c.gamma;
  out.dt = c.dt;
  out.horizon = c.horizon;
  out.seed = c.seed;
  return out;
}

std::string schedule_json(const Schedule& s) {
  const nlohmann::json j = {{"kind", s.kind_name()}, {"B0", s.b0},
                            {"slope", s.slope},      {"ramp_end", s.ramp_end},
                            {"amplitude", s.amplitude}, {"period", s.period}};
  return j.dump();
}

void check_episode(const bss_series* s, std::size_t e) {
  require(s, "series");
  if (e >= s->data.episodes.size()) throw invalid_argument("episode index out of range");
}

}  // namespace

extern "C" {

const char* bss_version(void) { return "0.1.0"; }

const char* bss_last_error(void) { return g_last_error.c_str(); }

const char* bss_status_name(bss_status status) {
  switch (status) {
    case BSS_OK: return "ok";
    case BSS_ERR_INVALID_ARGUMENT: return "invalid argument";
    case BSS_ERR_DOMAIN: return "domain error";
    case BSS_ERR_DATA: return "data error";
    case BSS_ERR_NUMERICAL: return "numerical failure";
    case BSS_ERR_IO: return "i/o error";
    case BSS_ERR_CAPABILITY: return "capability error";
    case BSS_ERR_DIVERGENCE: return "divergence";
    case BSS_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void bss_set_log_level(bss_log_level level) {
  switch (level) {
    case BSS_LOG_DEBUG: log::set_level(log::Level::Debug); break;
    case BSS_LOG_INFO: log::set_level(log::Level::Info); break;
    case BSS_LOG_WARN: log::set_level(log::Level::Warn); break;
    case BSS_LOG_OFF: log::set_level(log::Level::Off); break;
  }
}

void bss_hyperparameters_default(bss_hyperparameters* out) {
  if (out == nullptr) return;
  const Hyperparameters h;
  *out = {h.a, h.b, h.a_tau, h.b_tau, static_cast<uint64_t>(h.n_draws),
          static_cast<uint64_t>(h.burn_in), h.seed};
}

void bss_selection_config_default(bss_selection_config* out) {
  if (out == nullptr) return;
  const SelectionConfig c;
  out->tolerance = c.tolerance;
  out->criterion = c.criterion == CriterionKind::AIC ? BSS_AIC : BSS_BIC;
  out->max_interaction_order = c.max_interaction_order;
  out->max_stage = c.max_stage;
  out->basis_ceiling = c.basis_ceiling;
  out->grid_size = c.grid_size;
  bss_hyperparameters_default(&out->hyper);
}

void bss_sir_config_default(bss_sir_config* out) {
  if (out == nullptr) return;
  const SIRConfig c;
  *out = {c.population, c.gamma, c.dt, c.horizon, c.seed};
}

bss_status bss_kernel_eval(double s, double t, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = main_effect_kernel(s, t);
  });
}

bss_status bss_gram_eigenvalues(size_t grid_size, double* out) {
  return guarded([&] {
    require(out, "out");
    const auto spectrum = KernelSpectrum::compute(grid_size);
    for (Eigen::Index i = 0; i < spectrum->gram_eigenvalues.size(); ++i) out[i] = spectrum->gram_eigenvalues(i);
  });
}

bss_status bss_basis_create(size_t n_basis, size_t grid_size, bss_basis** out) {
  return guarded([&] {
    require(out, "out");
    *out = nullptr;
    if (n_basis == 0) throw invalid_argument("n_basis must be at least 1");
    *out = new bss_basis{kl_decompose(n_basis, grid_size)};
  });
}

bss_status bss_basis_load_cache(const char* path, bss_basis** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new bss_basis{BasisSet::load_cache(path)};
  });
}

bss_status bss_basis_save_cache(const bss_basis* basis, const char* path) {
  return guarded([&] {
    require(basis, "basis");
    require(path, "path");
    basis->basis.save_cache(path);
  });
}

size_t bss_basis_size(const bss_basis* basis) { return basis ? basis->basis.size() : 0; }

size_t bss_basis_grid_size(const bss_basis* basis) { return basis ? basis->basis.grid_size() : 0; }

bss_status bss_basis_eigenvalues(const bss_basis* basis, double* out) {
  return guarded([&] {
    require(basis, "basis");
    require(out, "out");
    const auto& ev = basis->basis.eigenvalues();
    std::copy(ev.begin(), ev.end(), out);
  });
}

bss_status bss_basis_eval(const bss_basis* basis, size_t k, const double* x, size_t n, double* out) {
  return guarded([&] {
    require(basis, "basis");
    if (n == 0) return;
    require(x, "x");
    require(out, "out");
    for (std::size_t i = 0; i < n; ++i) out[i] = basis->basis.eval(k, x[i]);
  });
}

void bss_basis_free(bss_basis* basis) { delete basis; }

bss_status bss_design_matrix(const bss_basis* basis, const double* unit_inputs, size_t n, size_t d,
                             const int* term_rows, size_t n_terms, double* out) {
  return guarded([&] {
    require(basis, "basis");
    require(term_rows, "term_rows");
    require(out, "out");
    std::vector<TermRow> rows(n_terms, TermRow(d));
    for (std::size_t r = 0; r < n_terms; ++r) {
      for (std::size_t j = 0; j < d; ++j) rows[r][j] = term_rows[r * d + j];
    }
    matrix_to(build_design_columns(matrix_from(unit_inputs, n, d), rows, basis->basis), out);
  });
}

bss_status bss_gibbs_fit(const double* x, size_t n, size_t p, const double* z,
                         const bss_hyperparameters* hyper, bss_criterion criterion,
                         double* beta_mean, double* sigma2_mean, double* criterion_value) {
  return guarded([&] {
    require(z, "z");
    require(hyper, "hyper");
    require(beta_mean, "beta_mean");
    const Eigen::MatrixXd xm = matrix_from(x, n, p);
    const Eigen::VectorXd zv = Eigen::Map<const Eigen::VectorXd>(z, static_cast<Eigen::Index>(n));
    const Posterior post = gibbs_fit(xm, zv, to_cpp(*hyper), to_cpp(criterion));
    Eigen::Map<Eigen::VectorXd>(beta_mean, static_cast<Eigen::Index>(p)) = post.beta_mean;
    if (sigma2_mean != nullptr) {
      double sum = 0.0;
      for (double v : post.sigma2_draws) sum += v;
      *sigma2_mean = post.sigma2_draws.empty() ? std::nan("") : sum / static_cast<double>(post.sigma2_draws.size());
    }
    if (criterion_value != nullptr) *criterion_value = post.criterion.value;
  });
}

bss_status bss_model_fit(const double* inputs, size_t n, size_t d, const double* z,
                         const bss_selection_config* config, bss_model** out) {
  return guarded([&] {
    require(z, "z");
    require(config, "config");
    require(out, "out");
    const Eigen::MatrixXd raw = matrix_from(inputs, n, d);
    const Eigen::VectorXd zv = Eigen::Map<const Eigen::VectorXd>(z, static_cast<Eigen::Index>(n));
    *out = new bss_model{GPModel(forward_select(raw, zv, to_cpp(*config)))};
  });
}

bss_status bss_model_load(const char* path, bss_model** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new bss_model{GPModel::load(path)};
  });
}

bss_status bss_model_save(const bss_model* model, const char* path, int with_draws) {
  return guarded([&] {
    require(model, "model");
    require(path, "path");
    model->model.save(path, with_draws != 0);
  });
}

void bss_model_free(bss_model* model) { delete model; }

bss_status bss_model_set_names(bss_model* model, const char* const* names, size_t d,
                               const char* target) {
  return guarded([&] {
    require(model, "model");
    if (names != nullptr) {
      if (d != model->model.n_inputs()) throw invalid_argument("name count does not match inputs");
      std::vector<std::string> v;
      for (std::size_t i = 0; i < d; ++i) {
        require(names[i], "name");
        v.emplace_back(names[i]);
      }
      model->model.input_names = std::move(v);
    }
    if (target != nullptr) model->model.target_name = target;
  });
}

const char* bss_model_input_name(const bss_model* model, size_t i) {
  if (model == nullptr || i >= model->model.input_names.size()) return "";
  return model->model.input_names[i].c_str();
}

const char* bss_model_target_name(const bss_model* model) {
  return model ? model->model.target_name.c_str() : "";
}

size_t bss_model_n_inputs(const bss_model* model) { return model ? model->model.n_inputs() : 0; }
size_t bss_model_n_terms(const bss_model* model) { return model ? model->model.n_terms() : 0; }
size_t bss_model_n_draws(const bss_model* model) { return model ? model->model.n_draws() : 0; }

bss_status bss_model_criterion(const bss_model* model, double* value) {
  return guarded([&] {
    require(model, "model");
    require(value, "value");
    *value = model->model.selected().posterior.criterion.value;
  });
}

bss_status bss_model_terms(const bss_model* model, int* out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    const auto& rows = model->model.selected().terms.rows();
    const std::size_t d = model->model.n_inputs();
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (std::size_t j = 0; j < d; ++j) out[r * d + j] = rows[r][j];
    }
  });
}

bss_status bss_model_coefficients(const bss_model* model, double* out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    const auto& beta = model->model.selected().posterior.beta_mean;
    std::copy(beta.data(), beta.data() + beta.size(), out);
  });
}

bss_status bss_model_write_trace(const bss_model* model, const char* path) {
  return guarded([&] {
    require(model, "model");
    require(path, "path");
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw io_error(std::string("cannot write trace file: ") + path);
    write_trace_csv(f, model->model.selected().trace);
    if (!f) throw io_error(std::string("failed writing trace file: ") + path);
  });
}

bss_status bss_model_predict_mean(const bss_model* model, const double* inputs, size_t n, size_t d,
                                  double* out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    if (d != model->model.n_inputs()) {
      throw invalid_argument("model expects " + std::to_string(model->model.n_inputs()) +
                             " inputs, got " + std::to_string(d));
    }
    const Eigen::VectorXd pred = model->model.predict_mean(matrix_from(inputs, n, d));
    std::copy(pred.data(), pred.data() + pred.size(), out);
  });
}

bss_status bss_model_predict_bounds(const bss_model* model, const double* inputs, size_t n, size_t d,
                                    size_t n_curves, double* mean, double* lower, double* upper) {
  return guarded([&] {
    require(model, "model");
    if (d != model->model.n_inputs()) {
      throw invalid_argument("model expects " + std::to_string(model->model.n_inputs()) +
                             " inputs, got " + std::to_string(d));
    }
    const Eigen::MatrixXd raw = matrix_from(inputs, n, d);
    const PredictionBand band = model->model.predict_draws(raw, n_curves);
    if (mean != nullptr) {
      const Eigen::VectorXd m = model->model.predict_mean(raw);
      std::copy(m.data(), m.data() + m.size(), mean);
    }
    if (lower != nullptr) std::copy(band.lower.data(), band.lower.data() + band.lower.size(), lower);
    if (upper != nullptr) std::copy(band.upper.data(), band.upper.data() + band.upper.size(), upper);
  });
}

bss_status bss_series_generate_sir(const bss_sir_config* config, int test_set, bss_series** out) {
  return guarded([&] {
    require(config, "config");
    require(out, "out");
    SIRCorpus corpus = test_set ? generate_sir_test(to_cpp(*config)) : generate_sir_training(to_cpp(*config));
    auto* s = new bss_series{corpus.data, std::nullopt, {}};
    for (const auto& c : corpus.curves) s->schedules.push_back(schedule_json(c.schedule));
    s->corpus = std::move(corpus);
    *out = s;
  });
}

bss_status bss_series_write_corpus(const bss_series* series, const char* dir) {
  return guarded([&] {
    require(series, "series");
    require(dir, "dir");
    if (!series->corpus) throw capability_error("only generated corpora can be written");
    write_sir_corpus(*series->corpus, dir);
  });
}

bss_status bss_series_read_corpus(const char* dir, bss_series** out) {
  return guarded([&] {
    require(dir, "dir");
    require(out, "out");
    auto* s = new bss_series{read_corpus(dir), std::nullopt, {}};
    std::ifstream in(std::filesystem::path(dir) / "manifest.json");
    const auto manifest = nlohmann::json::parse(in, nullptr, false);
    if (!manifest.is_discarded() && manifest.contains("curves")) {
      for (const auto& c : manifest["curves"]) {
        s->schedules.push_back(c.contains("schedule") ? c["schedule"].dump() : std::string());
      }
    }
    s->schedules.resize(s->data.episodes.size());
    *out = s;
  });
}

bss_status bss_series_load_tanks(const char* path, bss_series** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    auto* s = new bss_series{load_cascaded_tanks(path), std::nullopt, {}};
    s->schedules.resize(s->data.episodes.size());
    *out = s;
  });
}

void bss_series_free(bss_series* series) { delete series; }

size_t bss_series_n_states(const bss_series* s) { return s ? s->data.n_states() : 0; }
size_t bss_series_n_forcing(const bss_series* s) { return s ? s->data.n_forcing() : 0; }
size_t bss_series_n_episodes(const bss_series* s) { return s ? s->data.episodes.size() : 0; }
size_t bss_series_total_samples(const bss_series* s) { return s ? s->data.total_samples() : 0; }

const char* bss_series_state_name(const bss_series* s, size_t i) {
  if (s == nullptr || i >= s->data.state_names.size()) return "";
  return s->data.state_names[i].c_str();
}

const char* bss_series_forcing_name(const bss_series* s, size_t i) {
  if (s == nullptr || i >= s->data.forcing_names.size()) return "";
  return s->data.forcing_names[i].c_str();
}

const char* bss_series_episode_id(const bss_series* s, size_t e) {
  if (s == nullptr || e >= s->data.episodes.size()) return "";
  return s->data.episodes[e].id.c_str();
}

size_t bss_series_episode_length(const bss_series* s, size_t e) {
  if (s == nullptr || e >= s->data.episodes.size()) return 0;
  return s->data.episodes[e].length();
}

bss_status bss_series_episode(const bss_series* s, size_t e, double* t, double* states,
                              double* forcing) {
  return guarded([&] {
    check_episode(s, e);
    const auto& ep = s->data.episodes[e];
    if (t != nullptr) std::copy(ep.t.begin(), ep.t.end(), t);
    matrix_to(ep.states, states);
    matrix_to(ep.forcing, forcing);
  });
}

const char* bss_series_episode_schedule(const bss_series* s, size_t e) {
  if (s == nullptr || e >= s->schedules.size()) return "";
  return s->schedules[e].c_str();
}

bss_status bss_series_derivatives(const bss_series* s, double* inputs, double* targets) {
  return guarded([&] {
    require(s, "series");
    const DerivativeSamples samples = estimate_derivatives(s->data);
    matrix_to(samples.inputs, inputs);
    matrix_to(samples.targets, targets);
  });
}

bss_status bss_dynamics_fit(const bss_series* series, const bss_selection_config* configs,
                            size_t n_configs, bss_dynamics** out) {
  return guarded([&] {
    require(series, "series");
    require(out, "out");
    const auto cfgs = configs_from(configs, n_configs);
    *out = new bss_dynamics{fit_dynamics(series->data, cfgs)};
  });
}

bss_status bss_dynamics_load(const char* path, bss_dynamics** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new bss_dynamics{StateSpaceModel::load(path)};
  });
}

bss_status bss_dynamics_save(const bss_dynamics* dynamics, const char* path) {
  return guarded([&] {
    require(dynamics, "dynamics");
    require(path, "path");
    dynamics->model.save(path);
  });
}

void bss_dynamics_free(bss_dynamics* dynamics) { delete dynamics; }

size_t bss_dynamics_n_states(const bss_dynamics* d) { return d ? d->model.n_states() : 0; }
size_t bss_dynamics_n_forcing(const bss_dynamics* d) { return d ? d->model.n_forcing() : 0; }

bss_status bss_dynamics_state_model(const bss_dynamics* dynamics, size_t state, bss_model** out) {
  return guarded([&] {
    require(dynamics, "dynamics");
    require(out, "out");
    if (state >= dynamics->model.n_states()) throw invalid_argument("state index out of range");
    *out = new bss_model{dynamics->model.model(state)};
  });
}

bss_status bss_dynamics_derivative(const bss_dynamics* dynamics, const double* x, const double* u,
                                   double* dx) {
  return guarded([&] {
    require(dynamics, "dynamics");
    require(x, "x");
    require(dx, "dx");
    const auto& m = dynamics->model;
    if (m.n_forcing() > 0) require(u, "u");
    const auto coef = m.mean_coefficients();
    m.derivative({x, m.n_states()}, {u, m.n_forcing()}, coef, {dx, m.n_states()});
  });
}

bss_status bss_dynamics_integrate(const bss_dynamics* dynamics, const double* x0,
                                  const double* forcing, size_t T, double dt, double t0,
                                  int with_uncertainty, size_t n_curves, bss_trajectory** out) {
  return guarded([&] {
    require(dynamics, "dynamics");
    require(x0, "x0");
    require(out, "out");
    const auto& m = dynamics->model;
    const Eigen::MatrixXd u = matrix_from(forcing, T, m.n_forcing());
    *out = new bss_trajectory{integrate(m, {x0, m.n_states()}, u, dt, with_uncertainty != 0, n_curves, t0)};
  });
}

void bss_trajectory_free(bss_trajectory* trajectory) { delete trajectory; }

size_t bss_trajectory_length(const bss_trajectory* tr) { return tr ? tr->traj.t.size() : 0; }

size_t bss_trajectory_n_states(const bss_trajectory* tr) {
  return tr ? static_cast<size_t>(tr->traj.mean.cols()) : 0;
}

int bss_trajectory_has_bounds(const bss_trajectory* tr) { return tr && tr->traj.has_bounds() ? 1 : 0; }

bss_status bss_trajectory_data(const bss_trajectory* tr, double* t, double* mean, double* lower,
                               double* upper) {
  return guarded([&] {
    require(tr, "trajectory");
    if ((lower != nullptr || upper != nullptr) && !tr->traj.has_bounds()) {
      throw capability_error("trajectory was integrated without uncertainty");
    }
    if (t != nullptr) std::copy(tr->traj.t.begin(), tr->traj.t.end(), t);
    matrix_to(tr->traj.mean, mean);
    matrix_to(tr->traj.lower, lower);
    matrix_to(tr->traj.upper, upper);
  });
}

bss_status bss_trajectory_write_csv(const bss_trajectory* tr, const char* path) {
  return guarded([&] {
    require(tr, "trajectory");
    require(path, "path");
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw io_error(std::string("cannot write trajectory file: ") + path);
    tr->traj.write_csv(f);
    if (!f) throw io_error(std::string("failed writing trajectory file: ") + path);
  });
}

bss_status bss_integrate_rhs(bss_rhs_fn f, void* user, const double* x0, size_t d,
                             const double* forcing, size_t T, size_t n_forcing, double dt,
                             double* out) {
  return guarded([&] {
    if (f == nullptr) throw invalid_argument("rhs callback must not be NULL");
    require(x0, "x0");
    require(out, "out");
    const DynamicsFn rhs = [&](std::span<const double> x, std::span<const double> u, std::span<double> dx) {
      if (f(user, x.data(), u.data(), dx.data()) != 0) {
        throw invalid_argument("right-hand side callback reported failure");
      }
    };
    matrix_to(integrate_rhs(rhs, {x0, d}, matrix_from(forcing, T, n_forcing), dt), out);
  });
}

bss_status bss_metrics(const double* predicted, const double* truth, size_t T, size_t d,
                       size_t skip_initial, double* mae, double* mape) {
  return guarded([&] {
    const StateMetrics m = metrics(matrix_from(predicted, T, d), matrix_from(truth, T, d), skip_initial);
    if (mae != nullptr) std::copy(m.mae.begin(), m.mae.end(), mae);
    if (mape != nullptr) std::copy(m.mape.begin(), m.mape.end(), mape);
  });
}

bss_status bss_dynamics_evaluate(const bss_dynamics* dynamics, const bss_series* test,
                                 size_t skip_initial, int with_uncertainty, size_t n_curves,
                                 const char* trajectory_dir, bss_evaluation** out) {
  return guarded([&] {
    require(dynamics, "dynamics");
    require(test, "test");
    require(out, "out");
    auto eval = std::make_unique<bss_evaluation>();
    eval->episodes = evaluate_episodes(dynamics->model, test->data, skip_initial, with_uncertainty != 0, n_curves);
    if (trajectory_dir != nullptr) {
      const std::filesystem::path dir(trajectory_dir);
      std::error_code ec;
      std::filesystem::create_directories(dir, ec);
      if (ec) throw io_error("cannot create " + dir.string() + ": " + ec.message());
      for (const auto& ev : eval->episodes) {
        if (!ev.trajectory) continue;
        std::ofstream f(dir / (ev.id + ".csv"), std::ios::trunc);
        if (!f) throw io_error("cannot write trajectory for " + ev.id);
        ev.trajectory->write_csv(f);
      }
    }
    // Ensembles are only needed for the bounds already summarized.
    for (auto& ev : eval->episodes) {
      if (ev.trajectory) ev.trajectory->ensemble.clear();
    }
    *out = eval.release();
  });
}

void bss_evaluation_free(bss_evaluation* evaluation) { delete evaluation; }

size_t bss_evaluation_n_episodes(const bss_evaluation* ev) { return ev ? ev->episodes.size() : 0; }

const char* bss_evaluation_episode_id(const bss_evaluation* ev, size_t e) {
  if (ev == nullptr || e >= ev->episodes.size()) return "";
  return ev->episodes[e].id.c_str();
}

const char* bss_evaluation_episode_error(const bss_evaluation* ev, size_t e) {
  if (ev == nullptr || e >= ev->episodes.size()) return "";
  return ev->episodes[e].error.c_str();
}

bss_status bss_evaluation_metrics(const bss_evaluation* ev, size_t e, double* mae, double* mape) {
  return guarded([&] {
    require(ev, "evaluation");
    if (e >= ev->episodes.size()) throw invalid_argument("episode index out of range");
    const auto& ep = ev->episodes[e];
    if (!ep.error.empty()) throw Error(ErrorKind::Divergence, ep.error);
    if (mae != nullptr) std::copy(ep.metrics.mae.begin(), ep.metrics.mae.end(), mae);
    if (mape != nullptr) std::copy(ep.metrics.mape.begin(), ep.metrics.mape.end(), mape);
  });
}

bss_status bss_crossval_run(const bss_series* series, const bss_selection_config* configs,
                            size_t n_configs, size_t k, int shuffle, uint64_t seed, int timeseries,
                            size_t skip_initial, bss_crossval** out) {
  return guarded([&] {
    require(series, "series");
    require(out, "out");
    const auto cfgs = configs_from(configs, n_configs);
    const FoldSpec spec{k, shuffle != 0, seed};
    *out = new bss_crossval{cross_validate(series->data, cfgs, spec, timeseries != 0, skip_initial)};
  });
}

void bss_crossval_free(bss_crossval* cv) { delete cv; }

size_t bss_crossval_n_folds(const bss_crossval* cv) { return cv ? cv->folds.size() : 0; }

const char* bss_crossval_fold_error(const bss_crossval* cv, size_t fold) {
  if (cv == nullptr || fold >= cv->folds.size()) return "";
  return cv->folds[fold].error.c_str();
}

bss_status bss_crossval_value(const bss_crossval* cv, size_t fold, size_t state,
                              bss_fold_value which, double* out) {
  return guarded([&] {
    require(cv, "crossval");
    require(out, "out");
    if (fold >= cv->folds.size()) throw invalid_argument("fold index out of range");
    const auto& f = cv->folds[fold];
    const auto pick = [&](const auto& v) -> double {
      if (state >= v.size()) throw capability_error("value not available for this fold/state");
      return static_cast<double>(v[state]);
    };
    switch (which) {
      case BSS_FOLD_DERIVATIVE_MAE: *out = pick(f.derivative_mae); return;
      case BSS_FOLD_SERIES_MAE: *out = pick(f.series_mae); return;
      case BSS_FOLD_SERIES_MAPE: *out = pick(f.series_mape); return;
      case BSS_FOLD_N_TERMS: *out = pick(f.n_terms); return;
    }
    throw invalid_argument("unknown fold value selector");
  });
}

}  // extern "C"
