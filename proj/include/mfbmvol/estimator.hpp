#pragma once

#include "mfbmvol/fgn.hpp"
#include "mfbmvol/mfbm.hpp"

#include <cstddef>
#include <span>

namespace mfbmvol {

struct EstimatorResult {
  double sigma2_hat = 0.0;
  double normalizing_factor = 0.0;
  double sum_sq_log_returns = 0.0;
  std::size_t n = 0;
  HurstParameter h{0.5};
};

struct StandardizedStat {
  double f_n = 0.0;
  double c = 0.0;  // asymptotic variance constant 2 sigma^4
};

/// (1/n)(1/n + 1/n^2H)^-1, written as 1 / (1 + n^(1-2H)).
double normalizing_factor(std::size_t n, HurstParameter h);

double sum_squared_log_returns(std::span<const double> log_returns);

/// Normalized quadratic variation of log-prices on the unit interval.
/// Fails with nonpositive_price if any level is not strictly positive and
/// with invalid_argument if the path is not observed on [0, 1].
EstimatorResult estimate_sigma2(const SamplePath& path, HurstParameter h);

/// Same estimator straight from log-returns; the Monte Carlo hot path.
EstimatorResult estimate_sigma2(std::span<const double> log_returns, HurstParameter h);

/// Sun's interval estimator: sum of squared log-returns over
/// (t2 - t1 + t2^H - t1^H). The path must span [t1, t2].
double estimate_sigma2_sun(const SamplePath& path, double t1, double t2, HurstParameter h);

/// 1 / (t2 - t1 + t2^H - t1^H).
double sun_normalizing_factor(double t1, double t2, HurstParameter h);

/// F_N = sqrt(N) (sigma2_hat - sigma2) / sqrt(2 sigma^4).
StandardizedStat standardized_statistic(const EstimatorResult& result, double true_sigma2);

}  // namespace mfbmvol
