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

#include "bssanova/kernel_basis.hpp"

#include "bssanova/errors.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <string>

#include <Eigen/Eigenvalues>

namespace bssanova {

double bernoulli_poly(int order, double x) {
  switch (order) {
    case 1: return x - 0.5;
    case 2: return x * x - x + 1.0 / 6.0;
    case 4: {
      const double x2 = x * x;
      return x2 * x2 - 2.0 * x2 * x + x2 - 1.0 / 30.0;
    }
    default:
      throw invalid_argument("unsupported Bernoulli polynomial order " +
                             std::to_string(order));
  }
}

double main_effect_kernel(double s, double t) {
  if (!(s >= 0.0 && s <= 1.0 && t >= 0.0 && t <= 1.0)) {
    throw domain_error("main-effect kernel arguments must lie in [0,1]");
  }
  return bernoulli_poly(1, s) * bernoulli_poly(1, t) +
         bernoulli_poly(2, s) * bernoulli_poly(2, t) -
         bernoulli_poly(4, std::abs(s - t)) / 24.0;
}

std::vector<double> uniform_grid(std::size_t grid_size) {
  if (grid_size < 2) throw invalid_argument("grid_size must be at least 2");
  std::vector<double> grid(grid_size);
  const double step = 1.0 / static_cast<double>(grid_size - 1);
  for (std::size_t i = 0; i + 1 < grid_size; ++i) grid[i] = static_cast<double>(i) * step;
  grid.back() = 1.0;
  return grid;
}

Eigen::MatrixXd gram_matrix(std::size_t grid_size) {
  const auto grid = uniform_grid(grid_size);
  const auto n = static_cast<Eigen::Index>(grid_size);
  Eigen::MatrixXd gram(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double k = main_effect_kernel(grid[i], grid[j]);
      gram(i, j) = k;
      gram(j, i) = k;
    }
  }
  return gram;
}

std::shared_ptr<const KernelSpectrum> KernelSpectrum::compute(std::size_t grid_size) {
  const Eigen::MatrixXd gram = gram_matrix(grid_size);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
  if (solver.info() != Eigen::Success) {
    throw numerical_error("eigendecomposition of the kernel Gram matrix did not converge");
  }

  auto spectrum = std::make_shared<KernelSpectrum>();
  spectrum->grid_size = grid_size;
  const Eigen::Index n = gram.rows();
  spectrum->gram_eigenvalues = solver.eigenvalues().reverse();
  spectrum->eigenvectors = solver.eigenvectors().rowwise().reverse();

  // Eigenvectors are sign-ambiguous: make the largest-magnitude entry positive,
  // first index winning ties.
  for (Eigen::Index k = 0; k < n; ++k) {
    auto col = spectrum->eigenvectors.col(k);
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(col(i)) > best) {
        best = std::abs(col(i));
        arg = i;
      }
    }
    if (col(arg) < 0.0) col = -col;
  }

  const double lambda_max = spectrum->gram_eigenvalues(0);
  const double floor = static_cast<double>(grid_size) *
                       std::numeric_limits<double>::epsilon() * lambda_max;
  std::size_t positive = 0;
  while (positive < grid_size && spectrum->gram_eigenvalues(positive) > floor) ++positive;
  spectrum->positive_count = positive;
  return spectrum;
}

std::shared_ptr<const KernelSpectrum> KernelSpectrum::cached(std::size_t grid_size) {
  static std::mutex mutex;
  static std::map<std::size_t, std::shared_ptr<const KernelSpectrum>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(grid_size);
  if (it != cache.end()) return it->second;
  auto spectrum = compute(grid_size);
  cache.emplace(grid_size, spectrum);
  return spectrum;
}

BasisSet BasisSet::from_spectrum(std::shared_ptr<const KernelSpectrum> spectrum,
                                 std::size_t n_basis) {
  if (!spectrum) throw invalid_argument("null kernel spectrum");
  if (n_basis > spectrum->positive_count) {
    throw invalid_argument("n_basis " + std::to_string(n_basis) + " exceeds the " +
                           std::to_string(spectrum->positive_count) +
                           " positive kernel eigenvalues");
  }
  const std::size_t g = spectrum->grid_size;
  BasisSet basis;
  basis.grid_ = uniform_grid(g);
  basis.eigenvalues_.reserve(n_basis);
  basis.splines_.reserve(n_basis);
  for (std::size_t k = 0; k < n_basis; ++k) {
    const double gram_eig = spectrum->gram_eigenvalues(static_cast<Eigen::Index>(k));
    basis.eigenvalues_.push_back(gram_eig / static_cast<double>(g));
    // Nystrom: phi_k = sqrt(g) v_k is quadrature-orthonormal; scaling by
    // sqrt(lambda_k) = sqrt(gram_eig / g) leaves sqrt(gram_eig) v_k.
    const double scale = std::sqrt(gram_eig);
    std::vector<double> samples(g);
    const auto col = spectrum->eigenvectors.col(static_cast<Eigen::Index>(k));
    for (std::size_t i = 0; i < g; ++i) samples[i] = scale * col(static_cast<Eigen::Index>(i));
    basis.splines_.emplace_back(0.0, 1.0, std::move(samples));
  }
  basis.spectrum_ = std::move(spectrum);
  return basis;
}

BasisSet kl_decompose(std::size_t n_basis, std::size_t grid_size) {
  if (grid_size < 2) throw invalid_argument("grid_size must be at least 2");
  if (n_basis > grid_size) throw invalid_argument("n_basis exceeds grid_size");
  return BasisSet::from_spectrum(KernelSpectrum::cached(grid_size), n_basis);
}

BasisSet basis_for(const BasisDescriptor& descriptor) {
  if (descriptor.kernel_tag != kKernelTag) {
    throw invalid_argument("basis kernel tag '" + descriptor.kernel_tag +
                           "' does not match '" + kKernelTag + "'");
  }
  return kl_decompose(descriptor.n_basis, descriptor.grid_size);
}

const CubicSpline& BasisSet::spline(std::size_t k) const {
  if (k < 1 || k > splines_.size()) {
    throw invalid_argument("basis index " + std::to_string(k) + " outside 1.." +
                           std::to_string(splines_.size()));
  }
  return splines_[k - 1];
}

double BasisSet::eval(std::size_t k, double x) const { return spline(k)(x); }

std::size_t BasisSet::available() const noexcept {
  if (spectrum_) return spectrum_->positive_count;
  return splines_.size();
}

BasisSet BasisSet::extended(std::size_t n_basis) const {
  if (n_basis <= splines_.size()) {
    BasisSet out = *this;
    out.eigenvalues_.resize(n_basis);
    out.splines_.resize(n_basis);
    return out;
  }
  auto spectrum = spectrum_ ? spectrum_ : KernelSpectrum::cached(grid_size());
  return from_spectrum(std::move(spectrum), n_basis);
}

BasisDescriptor BasisSet::descriptor() const {
  return BasisDescriptor{grid_size(), size(), kKernelTag};
}

namespace {

constexpr char kCacheMagic[8] = {'B', 'S', 'S', 'B', 'A', 'S', 'I', 'S'};
constexpr std::uint32_t kCacheVersion = 1;

template <typename T>
void write_pod(std::ofstream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

void write_doubles(std::ofstream& out, const std::vector<double>& v) {
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}

template <typename T>
T read_pod(std::ifstream& in) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
    throw io_error("basis cache truncated");
  }
  return value;
}

std::vector<double> read_doubles(std::ifstream& in, std::size_t n) {
  std::vector<double> v(n);
  if (!in.read(reinterpret_cast<char*>(v.data()),
               static_cast<std::streamsize>(n * sizeof(double)))) {
    throw io_error("basis cache truncated");
  }
  return v;
}

}  // namespace

void BasisSet::save_cache(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot open basis cache for writing: " + path.string());
  out.write(kCacheMagic, sizeof(kCacheMagic));
  write_pod(out, kCacheVersion);
  const std::string tag = kKernelTag;
  write_pod(out, static_cast<std::uint64_t>(tag.size()));
  out.write(tag.data(), static_cast<std::streamsize>(tag.size()));
  write_pod(out, static_cast<std::uint64_t>(grid_size()));
  write_pod(out, static_cast<std::uint64_t>(size()));
  write_doubles(out, grid_);
  write_doubles(out, eigenvalues_);
  for (const auto& s : splines_) {
    write_doubles(out, s.values());
    write_doubles(out, s.curvatures());
  }
  if (!out) throw io_error("failed writing basis cache: " + path.string());
}

BasisSet BasisSet::load_cache(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open basis cache: " + path.string());
  char magic[sizeof(kCacheMagic)];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kCacheMagic, sizeof(magic)) != 0) {
    throw io_error("not a basis cache file: " + path.string());
  }
  if (read_pod<std::uint32_t>(in) != kCacheVersion) {
    throw io_error("basis cache version mismatch: " + path.string());
  }
  const auto tag_len = read_pod<std::uint64_t>(in);
  if (tag_len > 1024) throw io_error("corrupt basis cache header");
  std::string tag(tag_len, '\0');
  if (!in.read(tag.data(), static_cast<std::streamsize>(tag_len))) {
    throw io_error("basis cache truncated");
  }
  if (tag != kKernelTag) throw io_error("basis cache built for a different kernel: " + tag);
  const auto g = read_pod<std::uint64_t>(in);
  const auto n = read_pod<std::uint64_t>(in);
  if (g < 2 || g > 1'000'000 || n > g) throw io_error("corrupt basis cache header");

  BasisSet basis;
  basis.grid_ = read_doubles(in, g);
  basis.eigenvalues_ = read_doubles(in, n);
  basis.splines_.reserve(n);
  for (std::uint64_t k = 0; k < n; ++k) {
    auto values = read_doubles(in, g);
    auto curv = read_doubles(in, g);
    basis.splines_.push_back(CubicSpline::from_parts(0.0, 1.0, std::move(values), std::move(curv)));
  }
  if (basis.grid_ != uniform_grid(g)) throw io_error("basis cache grid does not match");
  return basis;
}

}  // namespace bssanova
