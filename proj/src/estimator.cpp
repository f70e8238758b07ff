#include "mfbmvol/estimator.hpp"

#include "mfbmvol/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mfbmvol {

namespace {

void check_levels(const SamplePath& path) {
  for (double s : path.s_levels) {
    if (!(s > 0.0)) {
      std::ostringstream os;
      os << "price levels must be strictly positive, got " << s;
      fail(ErrorCode::nonpositive_price, os.str());
    }
  }
}

bool close_to(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); }

}  // namespace

double normalizing_factor(std::size_t n, HurstParameter h) {
  require(n >= 1, "normalizing factor needs n >= 1");
  return 1.0 / (1.0 + std::pow(static_cast<double>(n), 1.0 - 2.0 * h.value()));
}

double sum_squared_log_returns(std::span<const double> log_returns) {
  double s = 0.0;
  for (double r : log_returns) s += r * r;
  return s;
}

EstimatorResult estimate_sigma2(std::span<const double> log_returns, HurstParameter h) {
  require(!log_returns.empty(), "estimator needs at least one log-return");
  EstimatorResult r;
  r.n = log_returns.size();
  r.h = h;
  r.normalizing_factor = normalizing_factor(r.n, h);
  r.sum_sq_log_returns = sum_squared_log_returns(log_returns);
  r.sigma2_hat = r.normalizing_factor * r.sum_sq_log_returns;
  return r;
}

EstimatorResult estimate_sigma2(const SamplePath& path, HurstParameter h) {
  check_levels(path);
  require(close_to(path.grid.t_start, 0.0) && close_to(path.grid.t_end, 1.0),
          "the normalized estimator requires observations on [0, 1]");
  return estimate_sigma2(std::span<const double>(path.log_returns), h);
}

double sun_normalizing_factor(double t1, double t2, HurstParameter h) {
  require(t1 >= 0.0 && t1 < t2, "Sun estimator requires 0 <= t1 < t2");
  const double denom = t2 - t1 + std::pow(t2, h.value()) - std::pow(t1, h.value());
  require(denom > 0.0, "Sun estimator denominator must be positive");
  return 1.0 / denom;
}

double estimate_sigma2_sun(const SamplePath& path, double t1, double t2, HurstParameter h) {
  check_levels(path);
  const double factor = sun_normalizing_factor(t1, t2, h);
  require(close_to(path.grid.t_start, t1) && close_to(path.grid.t_end, t2),
          "path is not observed on [t1, t2]");
  return factor * sum_squared_log_returns(path.log_returns);
}

StandardizedStat standardized_statistic(const EstimatorResult& result, double true_sigma2) {
  require(true_sigma2 > 0.0, "true sigma2 must be positive");
  StandardizedStat s;
  s.c = 2.0 * true_sigma2 * true_sigma2;
  s.f_n = std::sqrt(static_cast<double>(result.n)) * (result.sigma2_hat - true_sigma2) /
          std::sqrt(s.c);
  return s;
}

}  // namespace mfbmvol
