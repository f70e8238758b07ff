#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace testsupport {

// Independent closed form, kept separate from the library on purpose.
inline double gamma_h(double k, double h) {
  k = std::abs(k);
  return 0.5 * (std::pow(k + 1.0, 2 * h) + std::pow(std::abs(k - 1.0), 2 * h) -
                2.0 * std::pow(k, 2 * h));
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

// Mean and standard error of i.i.d. per-replication statistics.
inline MeanSe mean_se(std::span<const double> xs) {
  MeanSe r;
  for (double x : xs) r.mean += x;
  r.mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - r.mean) * (x - r.mean);
  r.se = std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
  return r;
}

// Per-replication lag-k autocovariance (zero-mean estimator), one entry per
// replication, for lags 0..max_lag.
inline std::vector<std::vector<double>> lag_products(
    std::size_t reps, std::size_t max_lag,
    const std::function<std::vector<double>(std::size_t)>& draw) {
  std::vector<std::vector<double>> out(max_lag + 1, std::vector<double>(reps));
  for (std::size_t r = 0; r < reps; ++r) {
    const auto x = draw(r);
    for (std::size_t k = 0; k <= max_lag; ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i + k < x.size(); ++i) s += x[i] * x[i + k];
      out[k][r] = s / static_cast<double>(x.size() - k);
    }
  }
  return out;
}

}  // namespace testsupport
