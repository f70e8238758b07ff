#pragma once

#include "mfbmvol/fgn.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>

namespace mfbmvol {

/// Exact finite-N moments of the normalized estimator with alpha = beta = 1.
///
/// The squared log-return sum splits as U1 + U2 + U3: a deterministic drift
/// term, a term linear in the increments and a pure quadratic form. With
/// f = normalizing_factor(n, H) and r_jk = E(dM_j dM_k):
///
///   E sigma2_hat   = f U1 + sigma2
///   Var sigma2_hat = f^2 (Var U2 + Var V3),   V3 = U3 - E U3
///   Var V3         = 2 sigma^4 sum_jk r_jk^2
///   Var U2         = 4 sigma^2 sum_jk b_j b_k r_jk
///
/// where b_j is the drift of the j-th log-return. U2 and V3 are uncorrelated
/// since they live in Wiener chaoses of order 1 and 2.
struct MomentReport {
  std::size_t n = 0;
  double h = 0.0;
  double sigma2 = 0.0;
  double mu = 0.0;
  double exact_mean = 0.0;
  double exact_variance = 0.0;
  double u1_term = 0.0;        // U1, before normalization
  double t1_term = 0.0;        // f * U1, the finite-N bias
  double var_u2_scaled = 0.0;  // N f^2 Var U2
  double var_s3_scaled = 0.0;  // E(sqrt(N) S3)^2 = N f^2 Var V3
  double c_asymptotic = 0.0;   // 2 sigma^4
  // Candidate limit of E(sqrt(N) S3)^2 when H < 1/2; empty otherwise.
  std::optional<double> c_series;
};

inline constexpr std::size_t kAnalyticCap = std::size_t{1} << 16;
inline constexpr std::uint64_t kSeriesTerms = 1'000'000;

double exact_mean_sigma2(std::size_t n, HurstParameter h, double sigma2, double mu = 0.0);

/// Moments by the Toeplitz route: O(n) for sum r^2 and an FFT
/// autocorrelation for the U2 quadratic form.
MomentReport exact_var_sigma2(std::size_t n, HurstParameter h, double sigma2, double mu = 0.0,
                              std::size_t cap = kAnalyticCap);

/// Plain O(n^2) double sums over increment_covariance; cross-check only.
MomentReport exact_var_sigma2_bruteforce(std::size_t n, HurstParameter h, double sigma2,
                                         double mu = 0.0, std::size_t cap = 2048);

/// The explicit bound sigma^4 (2H+1)^2 / (4n) on U1 (mu = 0). It holds for
/// H >= 1/2 only; below that the first fractional drift n^-2H dominates.
double u1_upper_bound(std::size_t n, HurstParameter h, double sigma2);

/// c = 2 sigma^4.
double asymptotic_variance_c(double sigma2);

/// 2 sigma^4 (1 + 2 sum_{k=1}^{k_max} gamma_H(k)^2). Meaningful as a limit
/// only for H < 1/2; for larger H the series is a diagnostic.
double limit_variance_series(HurstParameter h, double sigma2, std::uint64_t k_max);

/// -Phi'''(x) / (3 sqrt 2) with Phi'''(x) = (x^2 - 1) phi(x).
double be_limit_curve(double x);

/// N^(-1/2).
double psi_rate(std::size_t n);

}  // namespace mfbmvol
