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

#include "bssanova/cubic_spline.hpp"

#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace bssanova {

inline constexpr std::size_t kDefaultGridSize = 501;
inline constexpr std::size_t kDefaultBasisCeiling = 25;

/// Identifies the kernel variant baked into a basis; bumped whenever the
/// kernel definition changes so cached or serialized bases are rejected.
inline constexpr const char* kKernelTag = "bss-anova-main-effect/b4-minus/v1";

/// Bernoulli polynomial of order 1, 2 or 4.
double bernoulli_poly(int order, double x);

/// Main-effect kernel B1(s)B1(t) + B2(s)B2(t) - B4(|s-t|)/24 on [0,1]^2.
double main_effect_kernel(double s, double t);

/// Uniform grid lo..1 with `grid_size` points, identical to the spline knots.
std::vector<double> uniform_grid(std::size_t grid_size);

/// Gram matrix of the main-effect kernel on the uniform grid.
Eigen::MatrixXd gram_matrix(std::size_t grid_size);

/// Full symmetric eigendecomposition of the Gram matrix, eigenvalues in
/// descending order and eigenvector signs fixed. Shared between bases built
/// on the same grid.
struct KernelSpectrum {
  std::size_t grid_size = 0;
  Eigen::VectorXd gram_eigenvalues;  // eigenvalues of K itself, descending
  Eigen::MatrixXd eigenvectors;      // unit-norm columns
  std::size_t positive_count = 0;

  static std::shared_ptr<const KernelSpectrum> compute(std::size_t grid_size);
  /// Memoized per grid size.
  static std::shared_ptr<const KernelSpectrum> cached(std::size_t grid_size);
};

struct BasisDescriptor {
  std::size_t grid_size = kDefaultGridSize;
  std::size_t n_basis = 0;
  std::string kernel_tag = kKernelTag;
};

/// Eigenvalue-scaled KL eigenfunctions of the main-effect kernel, stored as
/// natural cubic splines on the grid. Immutable once built.
class BasisSet {
 public:
  BasisSet() = default;

  std::size_t size() const noexcept { return splines_.size(); }
  std::size_t grid_size() const noexcept { return grid_.size(); }
  const std::vector<double>& grid() const noexcept { return grid_; }
  /// Operator eigenvalues (Gram eigenvalues divided by the grid size).
  const std::vector<double>& eigenvalues() const noexcept { return eigenvalues_; }
  const CubicSpline& spline(std::size_t k) const;

  /// Scaled eigenfunction k (1-based) at clamp(x, 0, 1).
  double eval(std::size_t k, double x) const;
  /// Same as eval without the range check on k.
  double eval_unchecked(std::size_t k, double x) const noexcept {
    return splines_[k - 1](x);
  }

  /// Number of positive Gram eigenvalues available for extension.
  std::size_t available() const noexcept;
  /// Basis with n_basis functions sharing this basis' eigendecomposition.
  BasisSet extended(std::size_t n_basis) const;

  BasisDescriptor descriptor() const;

  /// Versioned binary cache: grid, eigenvalues, spline coefficients.
  void save_cache(const std::filesystem::path& path) const;
  static BasisSet load_cache(const std::filesystem::path& path);

  /// First n_basis scaled eigenfunctions of a precomputed spectrum.
  static BasisSet from_spectrum(std::shared_ptr<const KernelSpectrum> spectrum,
                                std::size_t n_basis);

 private:
  std::vector<double> grid_;
  std::vector<double> eigenvalues_;
  std::vector<CubicSpline> splines_;
  std::shared_ptr<const KernelSpectrum> spectrum_;
};

BasisSet kl_decompose(std::size_t n_basis, std::size_t grid_size = kDefaultGridSize);

/// Basis matching a descriptor, rejecting unknown kernel tags.
BasisSet basis_for(const BasisDescriptor& descriptor);

}  // namespace bssanova
