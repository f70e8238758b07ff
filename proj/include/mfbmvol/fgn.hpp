#pragma once

#include "mfbmvol/rng.hpp"

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace mfbmvol {

/// Hurst index, validated to lie strictly inside (0, 1).
class HurstParameter {
 public:
  explicit HurstParameter(double h);

  double value() const noexcept { return h_; }

  friend bool operator==(HurstParameter, HurstParameter) = default;

 private:
  double h_;
};

/// Unit-spacing noise values, before any grid scaling.
using NoiseVector = std::vector<double>;

/// Autocovariance of unit-spacing fractional Gaussian noise at lag k:
/// gamma_H(k) = (|k+1|^2H + |k-1|^2H - 2|k|^2H) / 2.
double fgn_autocov(std::size_t k, HurstParameter h);

inline constexpr std::size_t kCholeskyOracleCap = 4096;

/// Exact fGn sampler by circulant embedding of the n x n Toeplitz covariance
/// into a circulant of size 2(n-1).
///
/// Construction computes the embedding spectrum once; `sample` is const and
/// may be called concurrently from any number of threads. Eigenvalues in
/// [-1e-12 * max, 0) are rounding noise and are clamped to zero; anything
/// more negative raises ErrorCode::degenerate_embedding.
class CirculantFgnSampler {
 public:
  CirculantFgnSampler(HurstParameter h, std::size_t n);
  ~CirculantFgnSampler();
  CirculantFgnSampler(CirculantFgnSampler&&) noexcept;
  CirculantFgnSampler& operator=(CirculantFgnSampler&&) noexcept;

  HurstParameter hurst() const noexcept { return h_; }
  std::size_t size() const noexcept { return n_; }
  std::size_t embedding_size() const noexcept;
  std::size_t clamped_eigenvalues() const noexcept;
  std::span<const double> eigenvalues() const noexcept;

  void sample(const RngSeed& seed, std::span<double> out) const;
  NoiseVector sample(const RngSeed& seed) const;

 private:
  struct Plan;
  HurstParameter h_;
  std::size_t n_;
  std::unique_ptr<Plan> plan_;
};

/// Dense Cholesky sampler for the same law; O(n^3) setup, used as the
/// brute-force oracle for the circulant path.
class CholeskyFgnSampler {
 public:
  CholeskyFgnSampler(HurstParameter h, std::size_t n,
                     std::size_t cap = kCholeskyOracleCap);

  std::size_t size() const noexcept { return n_; }
  void sample(const RngSeed& seed, std::span<double> out) const;
  NoiseVector sample(const RngSeed& seed) const;

 private:
  std::size_t n_;
  std::vector<double> lower_;  // row-major, lower triangle
};

NoiseVector sample_fgn_circulant(HurstParameter h, std::size_t n,
                                 const RngSeed& seed);
NoiseVector sample_fgn_cholesky(HurstParameter h, std::size_t n,
                                const RngSeed& seed,
                                std::size_t cap = kCholeskyOracleCap);
NoiseVector sample_gaussian_iid(std::size_t n, const RngSeed& seed);

}  // namespace mfbmvol
