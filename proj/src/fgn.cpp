#include "mfbmvol/fgn.hpp"

#include "mfbmvol/errors.hpp"

#include "fftw_support.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>

namespace mfbmvol {

namespace {

using detail::fftw_buffer;
using detail::fftw_planner_mutex;

constexpr double kEigenvalueTolerance = 1e-12;

}  // namespace

HurstParameter::HurstParameter(double h) : h_(h) {
  if (!(h > 0.0 && h < 1.0)) {
    std::ostringstream os;
    os << "Hurst parameter must lie in (0, 1), got " << h;
    fail(ErrorCode::invalid_argument, os.str());
  }
}

double fgn_autocov(std::size_t k, HurstParameter h) {
  if (k == 0) return 1.0;
  const double two_h = 2.0 * h.value();
  const double kd = static_cast<double>(k);
  return 0.5 * (std::pow(kd + 1.0, two_h) + std::pow(kd - 1.0, two_h) -
                2.0 * std::pow(kd, two_h));
}

// ---------------------------------------------------------------------------
// Circulant embedding

struct CirculantFgnSampler::Plan {
  std::size_t m = 0;                 // embedding size 2(n-1)
  std::vector<double> lambda;        // eigenvalues, k = 0..m/2
  std::vector<double> amplitude;     // per-frequency standard deviations
  std::size_t clamped = 0;
  fftw_plan c2r = nullptr;

  ~Plan() {
    if (c2r != nullptr) {
      std::lock_guard lock(fftw_planner_mutex());
      fftw_destroy_plan(c2r);
    }
  }
};

CirculantFgnSampler::CirculantFgnSampler(HurstParameter h, std::size_t n)
    : h_(h), n_(n), plan_(std::make_unique<Plan>()) {
  require(n >= 1, "fGn sample size must be at least 1");
  if (n == 1) return;

  Plan& p = *plan_;
  p.m = 2 * (n - 1);
  const std::size_t half = p.m / 2;
  const int m_int = static_cast<int>(p.m);

  auto row = fftw_buffer<double>(p.m);
  auto spectrum = fftw_buffer<fftw_complex>(half + 1);
  for (std::size_t k = 0; k < n; ++k) row[k] = fgn_autocov(k, h);
  for (std::size_t k = 1; k + 1 < n; ++k) row[p.m - k] = row[k];

  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_plan r2c = fftw_plan_dft_r2c_1d(m_int, row.get(), spectrum.get(), FFTW_ESTIMATE);
    fftw_execute(r2c);
    fftw_destroy_plan(r2c);
  }

  p.lambda.resize(half + 1);
  double lambda_max = 0.0;
  for (std::size_t k = 0; k <= half; ++k) {
    p.lambda[k] = spectrum[k][0];
    lambda_max = std::max(lambda_max, p.lambda[k]);
  }
  const double floor = -kEigenvalueTolerance * lambda_max;
  for (std::size_t k = 0; k <= half; ++k) {
    double& l = p.lambda[k];
    if (l >= 0.0) continue;
    if (l < floor) {
      std::ostringstream os;
      os << "circulant embedding is not nonnegative definite: eigenvalue " << l
         << " at frequency " << k << " (H=" << h.value() << ", n=" << n << ")";
      fail(ErrorCode::degenerate_embedding, os.str());
    }
    l = 0.0;
    ++p.clamped;
  }

  const double md = static_cast<double>(p.m);
  p.amplitude.resize(half + 1);
  p.amplitude[0] = std::sqrt(p.lambda[0] / md);
  p.amplitude[half] = std::sqrt(p.lambda[half] / md);
  for (std::size_t k = 1; k < half; ++k) p.amplitude[k] = std::sqrt(p.lambda[k] / (2.0 * md));

  auto in = fftw_buffer<fftw_complex>(half + 1);
  auto out = fftw_buffer<double>(p.m);
  std::lock_guard lock(fftw_planner_mutex());
  p.c2r = fftw_plan_dft_c2r_1d(m_int, in.get(), out.get(), FFTW_ESTIMATE);
}

CirculantFgnSampler::~CirculantFgnSampler() = default;
CirculantFgnSampler::CirculantFgnSampler(CirculantFgnSampler&&) noexcept = default;
CirculantFgnSampler& CirculantFgnSampler::operator=(CirculantFgnSampler&&) noexcept = default;

std::size_t CirculantFgnSampler::embedding_size() const noexcept { return plan_->m; }
std::size_t CirculantFgnSampler::clamped_eigenvalues() const noexcept { return plan_->clamped; }
std::span<const double> CirculantFgnSampler::eigenvalues() const noexcept { return plan_->lambda; }

void CirculantFgnSampler::sample(const RngSeed& seed, std::span<double> out) const {
  require(out.size() == n_, "fGn output span has the wrong length");
  NormalStream normals(seed);
  if (n_ == 1) {
    out[0] = normals.next();
    return;
  }

  const Plan& p = *plan_;
  const std::size_t half = p.m / 2;
  auto spectrum = fftw_buffer<fftw_complex>(half + 1);
  auto field = fftw_buffer<double>(p.m);

  // Hermitian-symmetric complex Gaussian weights; the inverse transform of
  // W_k = sqrt(lambda_k) * (complex normal) has circulant covariance row c.
  spectrum[0][0] = p.amplitude[0] * normals.next();
  spectrum[0][1] = 0.0;
  for (std::size_t k = 1; k < half; ++k) {
    spectrum[k][0] = p.amplitude[k] * normals.next();
    spectrum[k][1] = p.amplitude[k] * normals.next();
  }
  spectrum[half][0] = p.amplitude[half] * normals.next();
  spectrum[half][1] = 0.0;

  fftw_execute_dft_c2r(p.c2r, spectrum.get(), field.get());
  std::copy_n(field.get(), n_, out.begin());
}

NoiseVector CirculantFgnSampler::sample(const RngSeed& seed) const {
  NoiseVector v(n_);
  sample(seed, v);
  return v;
}

// ---------------------------------------------------------------------------
// Dense Cholesky oracle

CholeskyFgnSampler::CholeskyFgnSampler(HurstParameter h, std::size_t n, std::size_t cap)
    : n_(n) {
  require(n >= 1, "fGn sample size must be at least 1");
  if (n > cap) {
    std::ostringstream os;
    os << "Cholesky oracle size " << n << " exceeds cap " << cap;
    fail(ErrorCode::cap_exceeded, os.str());
  }

  std::vector<double> gamma(n);
  for (std::size_t k = 0; k < n; ++k) gamma[k] = fgn_autocov(k, h);

  lower_.assign(n * n, 0.0);
  auto L = [&](std::size_t i, std::size_t j) -> double& { return lower_[i * n + j]; };
  for (std::size_t j = 0; j < n; ++j) {
    double d = gamma[0];
    for (std::size_t k = 0; k < j; ++k) d -= L(j, k) * L(j, k);
    if (!(d > 0.0)) {
      std::ostringstream os;
      os << "fGn covariance not positive definite at pivot " << j << " (H=" << h.value()
         << ", n=" << n << ")";
      fail(ErrorCode::factorization_failed, os.str());
    }
    const double diag = std::sqrt(d);
    L(j, j) = diag;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = gamma[i - j];
      for (std::size_t k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
      L(i, j) = s / diag;
    }
  }
}

void CholeskyFgnSampler::sample(const RngSeed& seed, std::span<double> out) const {
  require(out.size() == n_, "fGn output span has the wrong length");
  std::vector<double> z(n_);
  NormalStream(seed).fill(z);
  for (std::size_t i = 0; i < n_; ++i) {
    const double* row = &lower_[i * n_];
    double s = 0.0;
    for (std::size_t k = 0; k <= i; ++k) s += row[k] * z[k];
    out[i] = s;
  }
}

NoiseVector CholeskyFgnSampler::sample(const RngSeed& seed) const {
  NoiseVector v(n_);
  sample(seed, v);
  return v;
}

NoiseVector sample_fgn_circulant(HurstParameter h, std::size_t n, const RngSeed& seed) {
  return CirculantFgnSampler(h, n).sample(seed);
}

NoiseVector sample_fgn_cholesky(HurstParameter h, std::size_t n, const RngSeed& seed,
                                std::size_t cap) {
  return CholeskyFgnSampler(h, n, cap).sample(seed);
}

NoiseVector sample_gaussian_iid(std::size_t n, const RngSeed& seed) {
  require(n >= 1, "Gaussian sample size must be at least 1");
  NoiseVector v(n);
  NormalStream(seed).fill(v);
  return v;
}

}  // namespace mfbmvol
