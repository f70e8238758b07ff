#include "mfbmvol/analytics.hpp"

#include "mfbmvol/errors.hpp"
#include "mfbmvol/estimator.hpp"
#include "mfbmvol/mfbm.hpp"

#include "fftw_support.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>
#include <vector>

namespace mfbmvol {

namespace {

// Drift of the j-th log-return on the unit grid:
// (mu - sigma^2/2) A_j - sigma^2/2 E_j, A_j = 1/n, E_j = ((j+1)^2H - j^2H)/n^2H.
std::vector<double> return_drifts(std::size_t n, HurstParameter h, double sigma2, double mu) {
  const double nd = static_cast<double>(n);
  const double two_h = 2.0 * h.value();
  const double a = 1.0 / nd;
  const double n_pow = std::pow(nd, two_h);
  std::vector<double> b(n);
  double prev = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double next = std::pow(static_cast<double>(j + 1), two_h);
    const double e = (next - prev) / n_pow;
    prev = next;
    b[j] = (mu - 0.5 * sigma2) * a - 0.5 * sigma2 * e;
  }
  return b;
}

// acf[d] = sum_j b_j b_{j+d}, d = 0..n-1, by zero-padded FFT.
std::vector<double> autocorrelation(const std::vector<double>& b) {
  const std::size_t n = b.size();
  std::size_t len = 1;
  while (len < 2 * n) len <<= 1;
  const std::size_t bins = len / 2 + 1;

  auto x = detail::fftw_buffer<double>(len);
  auto spec = detail::fftw_buffer<fftw_complex>(bins);

  fftw_plan fwd, bwd;
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    fwd = fftw_plan_dft_r2c_1d(static_cast<int>(len), x.get(), spec.get(), FFTW_ESTIMATE);
    bwd = fftw_plan_dft_c2r_1d(static_cast<int>(len), spec.get(), x.get(), FFTW_ESTIMATE);
  }
  std::fill(x.get(), x.get() + len, 0.0);
  std::copy(b.begin(), b.end(), x.get());
  fftw_execute(fwd);
  for (std::size_t k = 0; k < bins; ++k) {
    spec[k][0] = spec[k][0] * spec[k][0] + spec[k][1] * spec[k][1];
    spec[k][1] = 0.0;
  }
  fftw_execute(bwd);
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
  }

  std::vector<double> acf(n);
  const double scale = 1.0 / static_cast<double>(len);
  for (std::size_t d = 0; d < n; ++d) acf[d] = x[d] * scale;
  return acf;
}

void check_inputs(std::size_t n, double sigma2, std::size_t cap) {
  require(n >= 1, "moment analytics need n >= 1");
  require(std::isfinite(sigma2) && sigma2 > 0.0, "sigma2 must be positive");
  if (n > cap) {
    std::ostringstream os;
    os << "analytic size " << n << " exceeds cap " << cap;
    fail(ErrorCode::cap_exceeded, os.str());
  }
}

MomentReport finish(std::size_t n, HurstParameter h, double sigma2, double mu, double u1,
                    double var_u2, double var_v3) {
  const double f = normalizing_factor(n, h);
  const double nd = static_cast<double>(n);
  MomentReport r;
  r.n = n;
  r.h = h.value();
  r.sigma2 = sigma2;
  r.mu = mu;
  r.u1_term = u1;
  r.t1_term = f * u1;
  r.exact_mean = r.t1_term + sigma2;
  r.exact_variance = f * f * (var_u2 + var_v3);
  r.var_u2_scaled = nd * f * f * var_u2;
  r.var_s3_scaled = nd * f * f * var_v3;
  r.c_asymptotic = asymptotic_variance_c(sigma2);
  if (h.value() < 0.5) r.c_series = limit_variance_series(h, sigma2, kSeriesTerms);
  return r;
}

}  // namespace

double exact_mean_sigma2(std::size_t n, HurstParameter h, double sigma2, double mu) {
  check_inputs(n, sigma2, std::numeric_limits<std::size_t>::max());
  double u1 = 0.0;
  for (double b : return_drifts(n, h, sigma2, mu)) u1 += b * b;
  return normalizing_factor(n, h) * u1 + sigma2;
}

MomentReport exact_var_sigma2(std::size_t n, HurstParameter h, double sigma2, double mu,
                              std::size_t cap) {
  check_inputs(n, sigma2, cap);
  const double nd = static_cast<double>(n);
  const double fbm_scale = std::pow(nd, -2.0 * h.value());

  // r_d = E(dM_j dM_{j+d}); only lag matters.
  std::vector<double> r(n);
  r[0] = 1.0 / nd + fbm_scale;
  for (std::size_t d = 1; d < n; ++d) r[d] = fbm_scale * fgn_autocov(d, h);

  double sum_r2 = nd * r[0] * r[0];
  for (std::size_t d = 1; d < n; ++d) sum_r2 += 2.0 * static_cast<double>(n - d) * r[d] * r[d];

  const std::vector<double> b = return_drifts(n, h, sigma2, mu);
  const std::vector<double> acf = autocorrelation(b);
  double quad = r[0] * acf[0];
  for (std::size_t d = 1; d < n; ++d) quad += 2.0 * r[d] * acf[d];

  double u1 = 0.0;
  for (double v : b) u1 += v * v;

  const double var_v3 = 2.0 * sigma2 * sigma2 * sum_r2;
  const double var_u2 = 4.0 * sigma2 * quad;
  return finish(n, h, sigma2, mu, u1, var_u2, var_v3);
}

MomentReport exact_var_sigma2_bruteforce(std::size_t n, HurstParameter h, double sigma2,
                                         double mu, std::size_t cap) {
  check_inputs(n, sigma2, cap);
  const GridSpec grid{n, 0.0, 1.0};
  const MixWeights unit{};
  const std::vector<double> b = return_drifts(n, h, sigma2, mu);

  double sum_r2 = 0.0, quad = 0.0, u1 = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    u1 += b[j] * b[j];
    for (std::size_t k = 0; k < n; ++k) {
      const double rjk = increment_covariance(j, k, grid, unit, h);
      sum_r2 += rjk * rjk;
      quad += b[j] * b[k] * rjk;
    }
  }
  return finish(n, h, sigma2, mu, u1, 4.0 * sigma2 * quad, 2.0 * sigma2 * sigma2 * sum_r2);
}

double u1_upper_bound(std::size_t n, HurstParameter h, double sigma2) {
  const double k = 2.0 * h.value() + 1.0;
  return sigma2 * sigma2 * k * k / (4.0 * static_cast<double>(n));
}

double asymptotic_variance_c(double sigma2) { return 2.0 * sigma2 * sigma2; }

double limit_variance_series(HurstParameter h, double sigma2, std::uint64_t k_max) {
  require(k_max >= 1, "series needs k_max >= 1");
  double s = 0.0;
  for (std::uint64_t k = 1; k <= k_max; ++k) {
    const double g = fgn_autocov(static_cast<std::size_t>(k), h);
    s += g * g;
  }
  return 2.0 * sigma2 * sigma2 * (1.0 + 2.0 * s);
}

double be_limit_curve(double x) {
  const double phi = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  return (1.0 - x * x) * phi / (3.0 * std::numbers::sqrt2);
}

double psi_rate(std::size_t n) {
  require(n >= 1, "psi_rate needs n >= 1");
  return 1.0 / std::sqrt(static_cast<double>(n));
}

}  // namespace mfbmvol
