#pragma once

#include "mfbmvol/fgn.hpp"
#include "mfbmvol/rng.hpp"

#include <cstddef>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

namespace mfbmvol {

/// Weights of M_t = alpha * B_t + beta * B^H_t; not both zero.
struct MixWeights {
  double alpha = 1.0;
  double beta = 1.0;

  void validate() const;
};

/// Equispaced grid t_j = t_start + j * (t_end - t_start) / n, j = 0..n.
struct GridSpec {
  std::size_t n = 1;
  double t_start = 0.0;
  double t_end = 1.0;

  void validate() const;
  double spacing() const noexcept { return (t_end - t_start) / static_cast<double>(n); }
  double time(std::size_t j) const noexcept;
  bool is_unit_interval() const noexcept { return t_start == 0.0 && t_end == 1.0; }
};

struct ModelParams {
  double s0 = 1.0;
  double mu = 0.0;
  double sigma2 = 1.0;
  HurstParameter h{0.5};
  MixWeights weights{};

  void validate() const;
};

/// Observed price path on a grid with n intervals.
///
/// `m_increments` is empty for paths reconstructed from observed levels.
/// `log_returns[j]` is always computed from the stored levels.
struct SamplePath {
  GridSpec grid;
  std::vector<double> times;         // n + 1
  std::vector<double> m_increments;  // n, or empty
  std::vector<double> s_levels;      // n + 1
  std::vector<double> log_returns;   // n

  std::size_t intervals() const noexcept { return log_returns.size(); }
};

/// cov(M_s, M_t) = alpha^2 min(s,t) + beta^2/2 (t^2H + s^2H - |t-s|^2H).
double mfbm_covariance(double s, double t, const MixWeights& w, HurstParameter h);

/// Both sides of the covariance form of M_{lambda t}(alpha, beta) =d
/// M_t(alpha lambda^1/2, beta lambda^H).
std::pair<double, double> self_similarity_check(double s, double t, double lambda,
                                                const MixWeights& w, HurstParameter h);

/// E(dM_j dM_k) on the grid: alpha^2 D 1{j=k} + beta^2 D^2H gamma_H(|j-k|).
double increment_covariance(std::size_t j, std::size_t k, const GridSpec& grid,
                            const MixWeights& w, HurstParameter h);

/// Substream tags for the two independent noise sources of a path.
inline constexpr std::uint32_t kBrownianSubstream = 0;
inline constexpr std::uint32_t kFgnSubstream = 1;

/// dM_j = alpha D^1/2 Z_j + beta D^H G_j with Z white and G unit fGn, drawn
/// from independent substreams of `seed`.
std::vector<double> sample_mfbm_increments(const GridSpec& grid, const MixWeights& w,
                                           HurstParameter h, const RngSeed& seed);

/// Same, reusing a prepared fGn sampler (its size must equal grid.n) and
/// explicit substream tags. Writes into `out`.
void sample_mfbm_increments(const GridSpec& grid, const MixWeights& w,
                            const CirculantFgnSampler& fgn, const RngSeed& seed,
                            std::uint32_t brownian_tag, std::uint32_t fgn_tag,
                            std::span<double> out);

/// Price levels S_{t_j} = s0 exp(mu (t_j - t_0) + sigma (M_{t_j} - M_{t_0})
///                            - sigma^2/2 ((t_j - t_0) + t_j^2H - t_0^2H)).
/// On the unit interval this is exactly the model with M_0 = 0.
SamplePath price_path(const ModelParams& params, std::span<const double> m_increments,
                      const GridSpec& grid);

/// Rebuild a path from observed (t, S) pairs. Times must be strictly
/// increasing and equispaced to 1e-9 relative; levels must be positive.
SamplePath path_from_levels(std::span<const double> times, std::span<const double> levels);

/// CSV with header `j,t_j,S,log_return`; row j carries log(S_j / S_{j-1}),
/// empty on row 0. Numbers use 17 significant digits.
void write_path_csv(std::ostream& os, const SamplePath& path);

/// Accepts either the format above or any CSV whose header names a time
/// column (`t` or `t_j`) and a price column (`S`).
SamplePath read_path_csv(std::istream& is);

}  // namespace mfbmvol
