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

#ifndef BSSANOVA_BSSANOVA_H_
#define BSSANOVA_BSSANOVA_H_

/* C interface to the BSS-ANOVA library.
 *
 * Every fallible call returns a bss_status. On failure the message is
 * available from bss_last_error() on the calling thread until the next call
 * from that thread. Handles are opaque and must be released with the
 * matching *_free function (passing NULL is allowed). Matrices are dense,
 * row-major and sized by the caller. */

#include <stddef.h>
#include <stdint.h>

#if defined(BSS_BUILDING_LIBRARY)
#define BSS_API __attribute__((visibility("default")))
#else
#define BSS_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bss_status {
  BSS_OK = 0,
  BSS_ERR_INVALID_ARGUMENT = 1,
  BSS_ERR_DOMAIN = 2,
  BSS_ERR_DATA = 3,
  BSS_ERR_NUMERICAL = 4,
  BSS_ERR_IO = 5,
  BSS_ERR_CAPABILITY = 6,
  BSS_ERR_DIVERGENCE = 7,
  BSS_ERR_INTERNAL = 8
} bss_status;

typedef enum bss_criterion { BSS_BIC = 0, BSS_AIC = 1 } bss_criterion;

typedef enum bss_log_level {
  BSS_LOG_DEBUG = 0,
  BSS_LOG_INFO = 1,
  BSS_LOG_WARN = 2,
  BSS_LOG_OFF = 3
} bss_log_level;

BSS_API const char* bss_version(void);
BSS_API const char* bss_last_error(void);
BSS_API const char* bss_status_name(bss_status status);
BSS_API void bss_set_log_level(bss_log_level level);

/* ---- configuration ---------------------------------------------------- */

typedef struct bss_hyperparameters {
  double a;      /* sigma^2 ~ IG(a, b) */
  double b;
  double a_tau;  /* tau^2 ~ IG(a_tau, b_tau) */
  double b_tau;
  uint64_t n_draws; /* total sweeps, burn-in included */
  uint64_t burn_in;
  uint64_t seed;
} bss_hyperparameters;

typedef struct bss_selection_config {
  int tolerance;
  bss_criterion criterion;
  int max_interaction_order; /* 1, 2 or 3 */
  int max_stage;
  size_t basis_ceiling;
  size_t grid_size;
  bss_hyperparameters hyper;
} bss_selection_config;

typedef struct bss_sir_config {
  double population;
  double gamma;
  double dt;
  double horizon;
  uint64_t seed;
} bss_sir_config;

BSS_API void bss_hyperparameters_default(bss_hyperparameters* out);
BSS_API void bss_selection_config_default(bss_selection_config* out);
BSS_API void bss_sir_config_default(bss_sir_config* out);

/* ---- kernel and basis ------------------------------------------------- */

typedef struct bss_basis bss_basis;

BSS_API bss_status bss_kernel_eval(double s, double t, double* out);

/* Gram matrix eigenvalues on a uniform grid, descending (grid_size values). */
BSS_API bss_status bss_gram_eigenvalues(size_t grid_size, double* out);

BSS_API bss_status bss_basis_create(size_t n_basis, size_t grid_size, bss_basis** out);
BSS_API bss_status bss_basis_load_cache(const char* path, bss_basis** out);
BSS_API bss_status bss_basis_save_cache(const bss_basis* basis, const char* path);
BSS_API size_t bss_basis_size(const bss_basis* basis);
BSS_API size_t bss_basis_grid_size(const bss_basis* basis);
/* Operator eigenvalues, bss_basis_size() values. */
BSS_API bss_status bss_basis_eigenvalues(const bss_basis* basis, double* out);
/* Scaled basis function k (1-based) at n points in [0, 1]. */
BSS_API bss_status bss_basis_eval(const bss_basis* basis, size_t k, const double* x, size_t n,
                                  double* out);
BSS_API void bss_basis_free(bss_basis* basis);

/* ---- design matrix and sampler ---------------------------------------- */

/* unit_inputs: n x d in [0, 1]; term_rows: n_terms x d basis orders (0 =
 * input absent). out: n x n_terms. */
BSS_API bss_status bss_design_matrix(const bss_basis* basis, const double* unit_inputs, size_t n,
                                     size_t d, const int* term_rows, size_t n_terms, double* out);

/* Gibbs fit of z = X beta + e. beta_mean has p entries; the other outputs
 * may be NULL. */
BSS_API bss_status bss_gibbs_fit(const double* x, size_t n, size_t p, const double* z,
                                 const bss_hyperparameters* hyper, bss_criterion criterion,
                                 double* beta_mean, double* sigma2_mean, double* criterion_value);

/* ---- fitted static models --------------------------------------------- */

typedef struct bss_model bss_model;

/* Forward selection on raw inputs (n x d) and targets (n). */
BSS_API bss_status bss_model_fit(const double* inputs, size_t n, size_t d, const double* z,
                                 const bss_selection_config* config, bss_model** out);
BSS_API bss_status bss_model_load(const char* path, bss_model** out);
BSS_API bss_status bss_model_save(const bss_model* model, const char* path, int with_draws);
BSS_API void bss_model_free(bss_model* model);

/* names may be NULL to leave input names unchanged; target may be NULL. */
BSS_API bss_status bss_model_set_names(bss_model* model, const char* const* names, size_t d,
                                       const char* target);
BSS_API const char* bss_model_input_name(const bss_model* model, size_t i);
BSS_API const char* bss_model_target_name(const bss_model* model);

BSS_API size_t bss_model_n_inputs(const bss_model* model);
BSS_API size_t bss_model_n_terms(const bss_model* model);
BSS_API size_t bss_model_n_draws(const bss_model* model);
BSS_API bss_status bss_model_criterion(const bss_model* model, double* value);
/* n_terms x n_inputs basis orders. */
BSS_API bss_status bss_model_terms(const bss_model* model, int* out);
BSS_API bss_status bss_model_coefficients(const bss_model* model, double* out);
/* Selection trace of a freshly fitted model (header only after load). */
BSS_API bss_status bss_model_write_trace(const bss_model* model, const char* path);

BSS_API bss_status bss_model_predict_mean(const bss_model* model, const double* inputs, size_t n,
                                          size_t d, double* out);
/* Posterior curves from n_curves evenly spaced draws; mean is the
 * posterior-mean prediction, lower/upper the 2.5/97.5 percentiles. */
BSS_API bss_status bss_model_predict_bounds(const bss_model* model, const double* inputs, size_t n,
                                            size_t d, size_t n_curves, double* mean, double* lower,
                                            double* upper);

/* ---- time series ------------------------------------------------------ */

typedef struct bss_series bss_series;

/* test_set = 0: 58 fixed-B training curves; 1: 24 time-varying test curves. */
BSS_API bss_status bss_series_generate_sir(const bss_sir_config* config, int test_set,
                                           bss_series** out);
/* Only for generated corpora. */
BSS_API bss_status bss_series_write_corpus(const bss_series* series, const char* dir);
BSS_API bss_status bss_series_read_corpus(const char* dir, bss_series** out);
BSS_API bss_status bss_series_load_tanks(const char* path, bss_series** out);
BSS_API void bss_series_free(bss_series* series);

BSS_API size_t bss_series_n_states(const bss_series* series);
BSS_API size_t bss_series_n_forcing(const bss_series* series);
BSS_API size_t bss_series_n_episodes(const bss_series* series);
BSS_API size_t bss_series_total_samples(const bss_series* series);
BSS_API const char* bss_series_state_name(const bss_series* series, size_t i);
BSS_API const char* bss_series_forcing_name(const bss_series* series, size_t i);
BSS_API const char* bss_series_episode_id(const bss_series* series, size_t episode);
BSS_API size_t bss_series_episode_length(const bss_series* series, size_t episode);
/* Any output may be NULL. states: T x n_states, forcing: T x n_forcing. */
BSS_API bss_status bss_series_episode(const bss_series* series, size_t episode, double* t,
                                      double* states, double* forcing);
/* Generated SIR corpora only: schedule description of an episode as JSON. */
BSS_API const char* bss_series_episode_schedule(const bss_series* series, size_t episode);

/* Finite-difference derivative samples: inputs N x (n_states + n_forcing),
 * targets N x n_states, N = bss_series_total_samples(). */
BSS_API bss_status bss_series_derivatives(const bss_series* series, double* inputs,
                                          double* targets);

/* ---- dynamics --------------------------------------------------------- */

typedef struct bss_dynamics bss_dynamics;
typedef struct bss_trajectory bss_trajectory;

/* One selection config per state. */
BSS_API bss_status bss_dynamics_fit(const bss_series* series, const bss_selection_config* configs,
                                    size_t n_configs, bss_dynamics** out);
BSS_API bss_status bss_dynamics_load(const char* path, bss_dynamics** out);
BSS_API bss_status bss_dynamics_save(const bss_dynamics* dynamics, const char* path);
BSS_API void bss_dynamics_free(bss_dynamics* dynamics);

BSS_API size_t bss_dynamics_n_states(const bss_dynamics* dynamics);
BSS_API size_t bss_dynamics_n_forcing(const bss_dynamics* dynamics);
/* Copy of the model for one state derivative. */
BSS_API bss_status bss_dynamics_state_model(const bss_dynamics* dynamics, size_t state,
                                            bss_model** out);
BSS_API bss_status bss_dynamics_derivative(const bss_dynamics* dynamics, const double* x,
                                           const double* u, double* dx);

/* forcing: T x n_forcing (may be NULL when n_forcing is 0). On divergence
 * returns BSS_ERR_DIVERGENCE and no trajectory. */
BSS_API bss_status bss_dynamics_integrate(const bss_dynamics* dynamics, const double* x0,
                                          const double* forcing, size_t T, double dt, double t0,
                                          int with_uncertainty, size_t n_curves,
                                          bss_trajectory** out);
BSS_API void bss_trajectory_free(bss_trajectory* trajectory);
BSS_API size_t bss_trajectory_length(const bss_trajectory* trajectory);
BSS_API size_t bss_trajectory_n_states(const bss_trajectory* trajectory);
BSS_API int bss_trajectory_has_bounds(const bss_trajectory* trajectory);
/* Any output may be NULL; lower/upper need bounds. */
BSS_API bss_status bss_trajectory_data(const bss_trajectory* trajectory, double* t, double* mean,
                                       double* lower, double* upper);
BSS_API bss_status bss_trajectory_write_csv(const bss_trajectory* trajectory, const char* path);

typedef int (*bss_rhs_fn)(void* user, const double* x, const double* u, double* dx);

/* RK4 on a caller-supplied right-hand side; a nonzero callback return aborts
 * with BSS_ERR_INVALID_ARGUMENT. out: T x d. */
BSS_API bss_status bss_integrate_rhs(bss_rhs_fn f, void* user, const double* x0, size_t d,
                                     const double* forcing, size_t T, size_t n_forcing, double dt,
                                     double* out);

/* Per-state MAE and MAPE (percent) after skipping the first rows. */
BSS_API bss_status bss_metrics(const double* predicted, const double* truth, size_t T, size_t d,
                               size_t skip_initial, double* mae, double* mape);

/* ---- evaluation ------------------------------------------------------- */

typedef struct bss_evaluation bss_evaluation;

/* Replays every episode of `test`. When trajectory_dir is non-NULL one CSV
 * per episode (<id>.csv) is written there. Failing episodes are reported,
 * not returned as errors. */
BSS_API bss_status bss_dynamics_evaluate(const bss_dynamics* dynamics, const bss_series* test,
                                         size_t skip_initial, int with_uncertainty,
                                         size_t n_curves, const char* trajectory_dir,
                                         bss_evaluation** out);
BSS_API void bss_evaluation_free(bss_evaluation* evaluation);
BSS_API size_t bss_evaluation_n_episodes(const bss_evaluation* evaluation);
BSS_API const char* bss_evaluation_episode_id(const bss_evaluation* evaluation, size_t episode);
/* Empty string when the episode integrated cleanly. */
BSS_API const char* bss_evaluation_episode_error(const bss_evaluation* evaluation, size_t episode);
BSS_API bss_status bss_evaluation_metrics(const bss_evaluation* evaluation, size_t episode,
                                          double* mae, double* mape);

typedef struct bss_crossval bss_crossval;

typedef enum bss_fold_value {
  BSS_FOLD_DERIVATIVE_MAE = 0,
  BSS_FOLD_SERIES_MAE = 1,
  BSS_FOLD_SERIES_MAPE = 2,
  BSS_FOLD_N_TERMS = 3
} bss_fold_value;

/* k-fold over the derivative samples of `series` (contiguous folds unless
 * shuffle). With timeseries != 0 each test block is also integrated. */
BSS_API bss_status bss_crossval_run(const bss_series* series, const bss_selection_config* configs,
                                    size_t n_configs, size_t k, int shuffle, uint64_t seed,
                                    int timeseries, size_t skip_initial, bss_crossval** out);
BSS_API void bss_crossval_free(bss_crossval* cv);
BSS_API size_t bss_crossval_n_folds(const bss_crossval* cv);
BSS_API const char* bss_crossval_fold_error(const bss_crossval* cv, size_t fold);
BSS_API bss_status bss_crossval_value(const bss_crossval* cv, size_t fold, size_t state,
                                      bss_fold_value which, double* out);

#ifdef __cplusplus
}
#endif

#endif /* BSSANOVA_BSSANOVA_H_ */
