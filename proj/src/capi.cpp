#include "mfbmvol/mfbmvol.h"

#include "mfbmvol/analytics.hpp"
#include "mfbmvol/errors.hpp"
#include "mfbmvol/estimator.hpp"
#include "mfbmvol/fgn.hpp"
#include "mfbmvol/harness.hpp"
#include "mfbmvol/mfbm.hpp"
#include "mfbmvol/report_io.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <new>
#include <sstream>
#include <string>

struct mfbmvol_path {
  mfbmvol::SamplePath path;
};

struct mfbmvol_report {
  mfbmvol::ExperimentReport report;
};

namespace {

thread_local std::string g_last_error;

template <typename F>
mfbmvol_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return MFBMVOL_OK;
  } catch (const mfbmvol::Error& e) {
    g_last_error = e.what();
    return static_cast<mfbmvol_status>(static_cast<int>(e.code()));
  } catch (const nlohmann::json::exception& e) {
    g_last_error = e.what();
    return MFBMVOL_E_CONFIG;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return MFBMVOL_E_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return MFBMVOL_E_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return MFBMVOL_E_INTERNAL;
  }
}

void check_out(const void* p, const char* name) {
  mfbmvol::require(p != nullptr, std::string(name) + " must not be null");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

mfbmvol::RngSeed to_seed(mfbmvol_seed s) { return {s.master_seed, s.stream_index, 0}; }

void fill_estimate(const mfbmvol::EstimatorResult& r, mfbmvol_estimate* out) {
  out->sigma2_hat = r.sigma2_hat;
  out->normalizing_factor = r.normalizing_factor;
  out->sum_sq_log_returns = r.sum_sq_log_returns;
  out->n = r.n;
  out->hurst = r.h.value();
}

mfbmvol::MomentReport from_c(const mfbmvol_moment_report& c) {
  mfbmvol::MomentReport r;
  r.n = c.n;
  r.h = c.hurst;
  r.sigma2 = c.sigma2;
  r.mu = c.mu;
  r.exact_mean = c.exact_mean;
  r.exact_variance = c.exact_variance;
  r.u1_term = c.u1_term;
  r.t1_term = c.t1_term;
  r.var_u2_scaled = c.var_u2_scaled;
  r.var_s3_scaled = c.var_s3_scaled;
  r.c_asymptotic = c.c_asymptotic;
  if (c.has_c_series) r.c_series = c.c_series;
  return r;
}

}  // namespace

extern "C" {

const char* mfbmvol_version(void) { return MFBMVOL_VERSION_STRING; }

const char* mfbmvol_status_name(mfbmvol_status status) {
  switch (status) {
    case MFBMVOL_OK: return "ok";
    case MFBMVOL_E_INVALID_ARGUMENT: return "invalid_argument";
    case MFBMVOL_E_DEGENERATE_EMBEDDING: return "degenerate_embedding";
    case MFBMVOL_E_FACTORIZATION: return "factorization_failed";
    case MFBMVOL_E_CAP_EXCEEDED: return "cap_exceeded";
    case MFBMVOL_E_NONPOSITIVE_PRICE: return "nonpositive_price";
    case MFBMVOL_E_IO: return "io";
    case MFBMVOL_E_CONFIG: return "config";
    case MFBMVOL_E_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* mfbmvol_last_error(void) { return g_last_error.c_str(); }

void mfbmvol_string_free(char* s) { std::free(s); }

mfbmvol_status mfbmvol_fgn_autocov(uint64_t lag, double hurst, double* out) {
  return guarded([&] {
    check_out(out, "out");
    *out = mfbmvol::fgn_autocov(lag, mfbmvol::HurstParameter(hurst));
  });
}

mfbmvol_status mfbmvol_sample_fgn(double hurst, size_t n, mfbmvol_seed seed,
                                  mfbmvol_fgn_method method, double* out) {
  return guarded([&] {
    check_out(out, "out");
    mfbmvol::HurstParameter h(hurst);
    mfbmvol::NoiseVector v;
    switch (method) {
      case MFBMVOL_FGN_CIRCULANT: v = mfbmvol::sample_fgn_circulant(h, n, to_seed(seed)); break;
      case MFBMVOL_FGN_CHOLESKY: v = mfbmvol::sample_fgn_cholesky(h, n, to_seed(seed)); break;
      default: mfbmvol::fail(mfbmvol::ErrorCode::invalid_argument, "unknown fGn method");
    }
    std::copy(v.begin(), v.end(), out);
  });
}

mfbmvol_status mfbmvol_sample_gaussian_iid(size_t n, mfbmvol_seed seed, double* out) {
  return guarded([&] {
    check_out(out, "out");
    auto v = mfbmvol::sample_gaussian_iid(n, to_seed(seed));
    std::copy(v.begin(), v.end(), out);
  });
}

mfbmvol_status mfbmvol_mfbm_covariance(double s, double t, double alpha, double beta,
                                       double hurst, double* out) {
  return guarded([&] {
    check_out(out, "out");
    mfbmvol::MixWeights w{alpha, beta};
    w.validate();
    *out = mfbmvol::mfbm_covariance(s, t, w, mfbmvol::HurstParameter(hurst));
  });
}

mfbmvol_status mfbmvol_increment_covariance(size_t j, size_t k, size_t n, double alpha,
                                            double beta, double hurst, double* out) {
  return guarded([&] {
    check_out(out, "out");
    mfbmvol::GridSpec grid{n, 0.0, 1.0};
    grid.validate();
    mfbmvol::require(j < n && k < n, "increment index out of range");
    mfbmvol::MixWeights w{alpha, beta};
    w.validate();
    *out = mfbmvol::increment_covariance(j, k, grid, w, mfbmvol::HurstParameter(hurst));
  });
}

void mfbmvol_model_params_init(mfbmvol_model_params* params) {
  if (params == nullptr) return;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  *params = mfbmvol_model_params{nan, 0.0, nan, nan, 1.0, 1.0};
}

void mfbmvol_grid_init(mfbmvol_grid* grid, size_t n) {
  if (grid == nullptr) return;
  *grid = mfbmvol_grid{n, 0.0, 1.0};
}

mfbmvol_status mfbmvol_path_simulate(const mfbmvol_model_params* params,
                                     const mfbmvol_grid* grid, mfbmvol_seed seed,
                                     mfbmvol_path** out) {
  return guarded([&] {
    check_out(params, "params");
    check_out(grid, "grid");
    check_out(out, "out");
    mfbmvol::ModelParams p{params->s0, params->mu, params->sigma2,
                           mfbmvol::HurstParameter(params->hurst),
                           mfbmvol::MixWeights{params->alpha, params->beta}};
    p.validate();
    mfbmvol::GridSpec g{grid->n, grid->t_start, grid->t_end};
    g.validate();
    auto dm = mfbmvol::sample_mfbm_increments(g, p.weights, p.h, to_seed(seed));
    auto handle = std::make_unique<mfbmvol_path>();
    handle->path = mfbmvol::price_path(p, dm, g);
    *out = handle.release();
  });
}

mfbmvol_status mfbmvol_path_from_levels(const double* times, const double* levels,
                                        size_t count, mfbmvol_path** out) {
  return guarded([&] {
    check_out(times, "times");
    check_out(levels, "levels");
    check_out(out, "out");
    auto handle = std::make_unique<mfbmvol_path>();
    handle->path = mfbmvol::path_from_levels({times, count}, {levels, count});
    *out = handle.release();
  });
}

mfbmvol_status mfbmvol_path_from_csv(const char* csv_text, mfbmvol_path** out) {
  return guarded([&] {
    check_out(csv_text, "csv_text");
    check_out(out, "out");
    std::istringstream is{std::string(csv_text)};
    auto handle = std::make_unique<mfbmvol_path>();
    handle->path = mfbmvol::read_path_csv(is);
    *out = handle.release();
  });
}

mfbmvol_status mfbmvol_path_to_csv(const mfbmvol_path* path, char** out) {
  return guarded([&] {
    check_out(path, "path");
    check_out(out, "out");
    std::ostringstream os;
    mfbmvol::write_path_csv(os, path->path);
    *out = dup_string(os.str());
  });
}

size_t mfbmvol_path_intervals(const mfbmvol_path* path) {
  return path == nullptr ? 0 : path->path.intervals();
}

const double* mfbmvol_path_times(const mfbmvol_path* path) {
  return path == nullptr ? nullptr : path->path.times.data();
}

const double* mfbmvol_path_levels(const mfbmvol_path* path) {
  return path == nullptr ? nullptr : path->path.s_levels.data();
}

const double* mfbmvol_path_log_returns(const mfbmvol_path* path) {
  return path == nullptr ? nullptr : path->path.log_returns.data();
}

void mfbmvol_path_free(mfbmvol_path* path) { delete path; }

mfbmvol_status mfbmvol_normalizing_factor(size_t n, double hurst, double* out) {
  return guarded([&] {
    check_out(out, "out");
    mfbmvol::require(n >= 1, "n must be at least 1");
    *out = mfbmvol::normalizing_factor(n, mfbmvol::HurstParameter(hurst));
  });
}

mfbmvol_status mfbmvol_estimate_sigma2(const mfbmvol_path* path, double hurst,
                                       mfbmvol_estimate* out) {
  return guarded([&] {
    check_out(path, "path");
    check_out(out, "out");
    fill_estimate(mfbmvol::estimate_sigma2(path->path, mfbmvol::HurstParameter(hurst)), out);
  });
}

mfbmvol_status mfbmvol_estimate_sigma2_sun(const mfbmvol_path* path, double t1, double t2,
                                           double hurst, mfbmvol_estimate* out) {
  return guarded([&] {
    check_out(path, "path");
    check_out(out, "out");
    mfbmvol::HurstParameter h(hurst);
    const double est = mfbmvol::estimate_sigma2_sun(path->path, t1, t2, h);
    out->sigma2_hat = est;
    out->normalizing_factor = mfbmvol::sun_normalizing_factor(t1, t2, h);
    out->sum_sq_log_returns = mfbmvol::sum_squared_log_returns(path->path.log_returns);
    out->n = path->path.intervals();
    out->hurst = hurst;
  });
}

mfbmvol_status mfbmvol_standardized_statistic(const mfbmvol_estimate* estimate,
                                              double true_sigma2, double* f_n, double* c) {
  return guarded([&] {
    check_out(estimate, "estimate");
    check_out(f_n, "f_n");
    mfbmvol::EstimatorResult r{estimate->sigma2_hat, estimate->normalizing_factor,
                               estimate->sum_sq_log_returns, estimate->n,
                               mfbmvol::HurstParameter(estimate->hurst)};
    const auto s = mfbmvol::standardized_statistic(r, true_sigma2);
    *f_n = s.f_n;
    if (c != nullptr) *c = s.c;
  });
}

mfbmvol_status mfbmvol_exact_moments(size_t n, double hurst, double sigma2, double mu,
                                     mfbmvol_moment_report* out) {
  return guarded([&] {
    check_out(out, "out");
    const auto r = mfbmvol::exact_var_sigma2(n, mfbmvol::HurstParameter(hurst), sigma2, mu);
    *out = mfbmvol_moment_report{r.n,
                                 r.h,
                                 r.sigma2,
                                 r.mu,
                                 r.exact_mean,
                                 r.exact_variance,
                                 r.u1_term,
                                 r.t1_term,
                                 r.var_u2_scaled,
                                 r.var_s3_scaled,
                                 r.c_asymptotic,
                                 r.c_series ? 1 : 0,
                                 r.c_series.value_or(0.0)};
  });
}

mfbmvol_status mfbmvol_moment_report_to_json(const mfbmvol_moment_report* report, char** out) {
  return guarded([&] {
    check_out(report, "report");
    check_out(out, "out");
    *out = dup_string(mfbmvol::moment_report_to_json(from_c(*report)).dump(2) + "\n");
  });
}

mfbmvol_status mfbmvol_limit_variance_series(double hurst, double sigma2, uint64_t k_max,
                                             double* out) {
  return guarded([&] {
    check_out(out, "out");
    *out = mfbmvol::limit_variance_series(mfbmvol::HurstParameter(hurst), sigma2, k_max);
  });
}

double mfbmvol_be_limit_curve(double x) { return mfbmvol::be_limit_curve(x); }

mfbmvol_status mfbmvol_be_curve_to_csv(const double* xs, size_t count, char** out) {
  return guarded([&] {
    check_out(out, "out");
    mfbmvol::require(count == 0 || xs != nullptr, "xs must not be null");
    *out = dup_string(mfbmvol::be_curve_to_csv({xs, count}));
  });
}

mfbmvol_status mfbmvol_psi_rate(size_t n, double* out) {
  return guarded([&] {
    check_out(out, "out");
    *out = mfbmvol::psi_rate(n);
  });
}

double mfbmvol_normal_cdf(double x) { return mfbmvol::normal_cdf(x); }

mfbmvol_status mfbmvol_ks_statistic_normal(const double* sorted, size_t count, double* out) {
  return guarded([&] {
    check_out(sorted, "sorted");
    check_out(out, "out");
    *out = mfbmvol::ks_statistic({sorted, count}, mfbmvol::normal_cdf);
  });
}

mfbmvol_status mfbmvol_experiment_run(const char* config_json, unsigned workers,
                                      mfbmvol_report** out) {
  return guarded([&] {
    check_out(config_json, "config_json");
    check_out(out, "out");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(config_json);
    } catch (const nlohmann::json::parse_error& e) {
      mfbmvol::fail(mfbmvol::ErrorCode::config, std::string("config is not valid JSON: ") + e.what());
    }
    const auto cfg = mfbmvol::config_from_json(j);
    auto handle = std::make_unique<mfbmvol_report>();
    handle->report = mfbmvol::run_experiment(cfg, mfbmvol::RunOptions{workers});
    *out = handle.release();
  });
}

mfbmvol_status mfbmvol_report_to_json(const mfbmvol_report* report, char** out) {
  return guarded([&] {
    check_out(report, "report");
    check_out(out, "out");
    *out = dup_string(mfbmvol::report_to_json(report->report));
  });
}

mfbmvol_status mfbmvol_report_to_csv(const mfbmvol_report* report, char** out) {
  return guarded([&] {
    check_out(report, "report");
    check_out(out, "out");
    *out = dup_string(mfbmvol::report_to_csv(report->report));
  });
}

int mfbmvol_report_gates_passed(const mfbmvol_report* report) {
  return report != nullptr && report->report.gates_passed() ? 1 : 0;
}

size_t mfbmvol_report_row_count(const mfbmvol_report* report) {
  return report == nullptr ? 0 : report->report.rows.size();
}

size_t mfbmvol_report_warning_count(const mfbmvol_report* report) {
  return report == nullptr ? 0 : report->report.warnings.size();
}

const char* mfbmvol_report_warning(const mfbmvol_report* report, size_t index) {
  if (report == nullptr || index >= report->report.warnings.size()) return nullptr;
  return report->report.warnings[index].c_str();
}

double mfbmvol_report_elapsed_seconds(const mfbmvol_report* report) {
  return report == nullptr ? 0.0 : report->report.elapsed_seconds;
}

void mfbmvol_report_free(mfbmvol_report* report) { delete report; }

}  // extern "C"
