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

#include "bssanova/gibbs_sampler.hpp"

#include "bssanova/errors.hpp"
#include "bssanova/logging.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace bssanova {

std::string to_string(CriterionKind kind) { return kind == CriterionKind::AIC ? "aic" : "bic"; }

CriterionKind criterion_from_string(const std::string& name) {
  if (name == "bic" || name == "BIC") return CriterionKind::BIC;
  if (name == "aic" || name == "AIC") return CriterionKind::AIC;
  throw invalid_argument("unknown criterion '" + name + "' (expected bic or aic)");
}

void Hyperparameters::validate() const {
  std::ostringstream problems;
  if (!(a > 0.0)) problems << " a must be > 0;";
  if (!(b > 0.0)) problems << " b must be > 0;";
  if (!(a_tau > 0.0)) problems << " a_tau must be > 0;";
  if (!(b_tau > 0.0)) problems << " b_tau must be > 0;";
  if (n_draws < 1) problems << " n_draws must be >= 1;";
  if (burn_in < 0 || burn_in >= n_draws) problems << " burn_in must be in [0, n_draws);";
  const auto msg = problems.str();
  if (!msg.empty()) throw invalid_argument("invalid hyperparameters:" + msg);
}

double draw_inverse_gamma(const ShapeScale& ig, Rng& rng) {
  std::gamma_distribution<double> gamma(ig.shape, 1.0);
  return ig.scale / gamma(rng);
}

RidgeSystem::RidgeSystem(const Eigen::MatrixXd& xtx, const Eigen::VectorXd& xtz, double tau2)
    : matrix(xtx) {
  if (!(tau2 > 0.0) || !std::isfinite(tau2)) throw numerical_error("tau^2 must be positive");
  matrix.diagonal().array() += 1.0 / tau2;
  factor.compute(matrix);
  if (factor.info() != Eigen::Success) {
    const double jitter = 1e-10 * matrix.trace() / static_cast<double>(matrix.rows());
    log::warn("Cholesky of the ridge system failed; retrying with diagonal jitter");
    matrix.diagonal().array() += jitter;
    factor.compute(matrix);
    if (factor.info() != Eigen::Success) {
      throw numerical_error("Cholesky factorization of X'X + I/tau^2 failed");
    }
  }
  mu = factor.solve(xtz);
}

Eigen::VectorXd draw_beta(const RidgeSystem& ridge, double sigma2, Rng& rng) {
  if (!(sigma2 > 0.0)) throw numerical_error("sigma^2 must be positive");
  const Eigen::Index p = ridge.mu.size();
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd xi(p);
  for (Eigen::Index i = 0; i < p; ++i) xi(i) = normal(rng);
  // A = L L', so L'^{-1} xi has covariance A^{-1}.
  Eigen::VectorXd offset = ridge.factor.matrixU().solve(xi);
  return ridge.mu + std::sqrt(sigma2) * offset;
}

Eigen::VectorXd draw_beta(const Eigen::MatrixXd& xtx, const Eigen::VectorXd& xtz, double sigma2,
                          double tau2, Rng& rng) {
  const RidgeSystem ridge(xtx, xtz, tau2);
  return draw_beta(ridge, sigma2, rng);
}

ShapeScale sigma2_conditional(const RidgeSystem& ridge, const Eigen::VectorXd& beta, double ztz,
                              const Eigen::VectorXd& xtz, const Hyperparameters& h, std::size_t n,
                              std::size_t p) {
  const Eigen::VectorXd diff = ridge.mu - beta;
  const double quad = diff.dot(ridge.matrix * diff);
  const double resid = ztz - ridge.mu.dot(xtz);
  ShapeScale ig;
  ig.shape = h.a + 1.0 + static_cast<double>(n) / 2.0 + static_cast<double>(p) / 2.0;
  ig.scale = h.b + 0.5 * (quad + resid);
  if (!(ig.scale > 0.0) || !std::isfinite(ig.scale)) {
    std::ostringstream msg;
    msg << "sigma^2 conditional scale is not positive: b*=" << ig.scale << " (b=" << h.b
        << ", quadratic form=" << quad << ", Z'Z=" << ztz << ", mu'X'Z=" << ridge.mu.dot(xtz)
        << ", N=" << n << ", P=" << p << ")";
    throw numerical_error(msg.str());
  }
  return ig;
}

double draw_sigma2(const RidgeSystem& ridge, const Eigen::VectorXd& beta, double ztz,
                   const Eigen::VectorXd& xtz, const Hyperparameters& h, std::size_t n,
                   std::size_t p, Rng& rng) {
  return draw_inverse_gamma(sigma2_conditional(ridge, beta, ztz, xtz, h, n, p), rng);
}

ShapeScale tau2_conditional(const Eigen::VectorXd& beta, double sigma2, const Hyperparameters& h) {
  if (!(sigma2 > 0.0)) throw numerical_error("sigma^2 must be positive");
  ShapeScale ig;
  ig.shape = h.a_tau + static_cast<double>(beta.size() - 1) / 2.0;
  ig.scale = h.b_tau + beta.squaredNorm() / (2.0 * sigma2);
  if (!std::isfinite(ig.scale)) throw numerical_error("tau^2 conditional scale is not finite");
  return ig;
}

double draw_tau2(const Eigen::VectorXd& beta, double sigma2, const Hyperparameters& h, Rng& rng) {
  return draw_inverse_gamma(tau2_conditional(beta, sigma2, h), rng);
}

double information_criterion(double sse, std::size_t n, std::size_t p, CriterionKind kind) {
  if (n == 0) throw invalid_argument("information criterion needs at least one instance");
  const double dn = static_cast<double>(n);
  double s2 = sse / dn;
  if (s2 < 1e-12) {
    log::warn("residual variance below 1e-12; flooring for the information criterion");
    s2 = 1e-12;
  }
  const double log_lik = -0.5 * dn * std::log(2.0 * std::numbers::pi * s2) - sse / (2.0 * s2);
  const double dp = static_cast<double>(p);
  const double penalty = kind == CriterionKind::BIC ? dp * std::log(dn) : 2.0 * dp;
  return penalty - 2.0 * log_lik;
}

double information_criterion(const Eigen::MatrixXd& x, const Eigen::VectorXd& z,
                             const Eigen::VectorXd& beta_hat, CriterionKind kind) {
  const double sse = (z - x * beta_hat).squaredNorm();
  return information_criterion(sse, static_cast<std::size_t>(x.rows()),
                               static_cast<std::size_t>(x.cols()), kind);
}

Posterior gibbs_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& z, const Hyperparameters& h,
                    CriterionKind kind) {
  h.validate();
  if (x.rows() != z.size()) throw invalid_argument("design rows and targets differ in length");
  if (x.cols() == 0) throw invalid_argument("design matrix has no columns");
  if (!z.allFinite()) throw data_error("non-finite target value");
  if (!x.allFinite()) throw data_error("non-finite design matrix entry");
  const auto n = static_cast<std::size_t>(x.rows());
  const auto p = static_cast<std::size_t>(x.cols());
  if (n < p) log::warn("fewer instances than terms; relying on the ridge prior");

  Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(x.cols(), x.cols());
  xtx.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose());
  xtx.triangularView<Eigen::StrictlyUpper>() = xtx.transpose();
  const Eigen::VectorXd xtz = x.transpose() * z;
  const double ztz = z.squaredNorm();

  Rng rng(h.seed);
  double sigma2 = h.a > 1.0 ? h.b / (h.a - 1.0) : 1.0;
  double tau2 = h.a_tau > 1.0 ? h.b_tau / (h.a_tau - 1.0) : 1.0;

  const int kept = h.n_draws - h.burn_in;
  Posterior post;
  post.beta_draws.resize(kept, x.cols());
  post.sigma2_draws.reserve(static_cast<std::size_t>(kept));
  post.tau2_draws.reserve(static_cast<std::size_t>(kept));

  for (int it = 0; it < h.n_draws; ++it) {
    const RidgeSystem ridge(xtx, xtz, tau2);
    const Eigen::VectorXd beta = draw_beta(ridge, sigma2, rng);
    sigma2 = draw_sigma2(ridge, beta, ztz, xtz, h, n, p, rng);
    tau2 = draw_tau2(beta, sigma2, h, rng);
    if (!std::isfinite(sigma2) || !(sigma2 > 0.0) || !std::isfinite(tau2) || !(tau2 > 0.0)) {
      throw numerical_error("Gibbs chain produced a non-positive or non-finite variance");
    }
    if (it >= h.burn_in) {
      post.beta_draws.row(it - h.burn_in) = beta.transpose();
      post.sigma2_draws.push_back(sigma2);
      post.tau2_draws.push_back(tau2);
    }
  }
  post.beta_mean = post.beta_draws.colwise().mean().transpose();
  post.criterion = {kind, information_criterion(x, z, post.beta_mean, kind)};
  return post;
}

}  // namespace bssanova
