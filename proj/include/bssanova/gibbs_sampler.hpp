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

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

namespace bssanova {

using Rng = std::mt19937_64;

enum class CriterionKind { BIC, AIC };

std::string to_string(CriterionKind kind);
CriterionKind criterion_from_string(const std::string& name);

/// Inverse-gamma priors sigma^2 ~ IG(a, b), tau^2 ~ IG(a_tau, b_tau) and the
/// chain length.
struct Hyperparameters {
  double a = 4.0;
  double b = 1.0;
  double a_tau = 4.0;
  double b_tau = 1.0;
  int n_draws = 2000;
  int burn_in = 1000;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Criterion {
  CriterionKind kind = CriterionKind::BIC;
  double value = 0.0;
};

struct Posterior {
  Eigen::MatrixXd beta_draws;  // retained draws x P
  std::vector<double> sigma2_draws;
  std::vector<double> tau2_draws;
  Eigen::VectorXd beta_mean;
  Criterion criterion;

  std::size_t n_terms() const noexcept { return static_cast<std::size_t>(beta_mean.size()); }
  bool has_draws() const noexcept { return beta_draws.rows() > 0; }
};

struct ShapeScale {
  double shape = 0.0;
  double scale = 0.0;
};

/// One draw from IG(shape, scale), i.e. scale / Gamma(shape, 1).
double draw_inverse_gamma(const ShapeScale& ig, Rng& rng);

/// Cholesky factor of X'X + I/tau^2 together with the conditional mean of beta.
struct RidgeSystem {
  Eigen::LLT<Eigen::MatrixXd> factor;
  Eigen::MatrixXd matrix;  // X'X + I/tau^2
  Eigen::VectorXd mu;

  RidgeSystem(const Eigen::MatrixXd& xtx, const Eigen::VectorXd& xtz, double tau2);
};

/// beta ~ MVN(mu, sigma^2 (X'X + I/tau^2)^-1).
Eigen::VectorXd draw_beta(const RidgeSystem& ridge, double sigma2, Rng& rng);
Eigen::VectorXd draw_beta(const Eigen::MatrixXd& xtx, const Eigen::VectorXd& xtz, double sigma2,
                          double tau2, Rng& rng);

/// a* = a + 1 + N/2 + P/2,
/// b* = b + [(mu-beta)'(X'X + I/tau^2)(mu-beta) + Z'Z - mu'X'Z] / 2.
ShapeScale sigma2_conditional(const RidgeSystem& ridge, const Eigen::VectorXd& beta, double ztz,
                              const Eigen::VectorXd& xtz, const Hyperparameters& h, std::size_t n,
                              std::size_t p);
double draw_sigma2(const RidgeSystem& ridge, const Eigen::VectorXd& beta, double ztz,
                   const Eigen::VectorXd& xtz, const Hyperparameters& h, std::size_t n,
                   std::size_t p, Rng& rng);

/// a*_tau = a_tau + (P-1)/2, b*_tau = b_tau + beta'beta / (2 sigma^2).
ShapeScale tau2_conditional(const Eigen::VectorXd& beta, double sigma2, const Hyperparameters& h);
double draw_tau2(const Eigen::VectorXd& beta, double sigma2, const Hyperparameters& h, Rng& rng);

/// Plug-in Gaussian log-likelihood at beta_hat with sigma_hat^2 = SSE/N,
/// penalized by P ln N (BIC) or 2P (AIC).
double information_criterion(double sse, std::size_t n, std::size_t p, CriterionKind kind);
double information_criterion(const Eigen::MatrixXd& x, const Eigen::VectorXd& z,
                             const Eigen::VectorXd& beta_hat, CriterionKind kind);

/// Blocked Gibbs sampler over (beta, sigma^2, tau^2). X'X and X'Z are formed
/// once per call.
Posterior gibbs_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& z, const Hyperparameters& h,
                    CriterionKind kind);

}  // namespace bssanova
