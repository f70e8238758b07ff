/*
 * C interface to the mfbmvol library: exact mixed-fBm path sampling, the
 * normalized quadratic-variation volatility estimator, its exact finite-N
 * moments and the Monte Carlo experiment engine.
 *
 * Conventions:
 *  - every fallible call returns an mfbmvol_status; MFBMVOL_OK is zero;
 *  - on failure, mfbmvol_last_error() describes the problem (per thread);
 *  - objects are opaque handles released with the matching *_free call;
 *  - strings returned through char** are released with mfbmvol_string_free.
 */
#ifndef MFBMVOL_H
#define MFBMVOL_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(MFBMVOL_BUILDING_LIBRARY)
#    define MFBMVOL_API __declspec(dllexport)
#  else
#    define MFBMVOL_API __declspec(dllimport)
#  endif
#else
#  define MFBMVOL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mfbmvol_status {
  MFBMVOL_OK = 0,
  MFBMVOL_E_INVALID_ARGUMENT = 1,
  MFBMVOL_E_DEGENERATE_EMBEDDING = 2,
  MFBMVOL_E_FACTORIZATION = 3,
  MFBMVOL_E_CAP_EXCEEDED = 4,
  MFBMVOL_E_NONPOSITIVE_PRICE = 5,
  MFBMVOL_E_IO = 6,
  MFBMVOL_E_CONFIG = 7,
  MFBMVOL_E_INTERNAL = 99
} mfbmvol_status;

MFBMVOL_API const char* mfbmvol_version(void);
MFBMVOL_API const char* mfbmvol_status_name(mfbmvol_status status);
MFBMVOL_API const char* mfbmvol_last_error(void);
MFBMVOL_API void mfbmvol_string_free(char* s);

/* ---- random streams and fractional Gaussian noise ---------------------- */

typedef struct mfbmvol_seed {
  uint64_t master_seed;
  uint64_t stream_index;
} mfbmvol_seed;

typedef enum mfbmvol_fgn_method {
  MFBMVOL_FGN_CIRCULANT = 0,
  MFBMVOL_FGN_CHOLESKY = 1
} mfbmvol_fgn_method;

MFBMVOL_API mfbmvol_status mfbmvol_fgn_autocov(uint64_t lag, double hurst, double* out);

/* Writes n unit-spacing fGn values to out. */
MFBMVOL_API mfbmvol_status mfbmvol_sample_fgn(double hurst, size_t n, mfbmvol_seed seed,
                                              mfbmvol_fgn_method method, double* out);

MFBMVOL_API mfbmvol_status mfbmvol_sample_gaussian_iid(size_t n, mfbmvol_seed seed,
                                                       double* out);

/* ---- mixed fractional Brownian motion ---------------------------------- */

MFBMVOL_API mfbmvol_status mfbmvol_mfbm_covariance(double s, double t, double alpha,
                                                   double beta, double hurst, double* out);

/* E(dM_j dM_k) on n equispaced intervals of [0, 1]. */
MFBMVOL_API mfbmvol_status mfbmvol_increment_covariance(size_t j, size_t k, size_t n,
                                                        double alpha, double beta,
                                                        double hurst, double* out);

typedef struct mfbmvol_model_params {
  double s0;
  double mu;
  double sigma2;
  double hurst;
  double alpha;
  double beta;
} mfbmvol_model_params;

typedef struct mfbmvol_grid {
  size_t n;
  double t_start;
  double t_end;
} mfbmvol_grid;

/* mu = 0, alpha = beta = 1; s0, sigma2 and hurst set to NaN (must be given). */
MFBMVOL_API void mfbmvol_model_params_init(mfbmvol_model_params* params);
/* t_start = 0, t_end = 1. */
MFBMVOL_API void mfbmvol_grid_init(mfbmvol_grid* grid, size_t n);

typedef struct mfbmvol_path mfbmvol_path;

MFBMVOL_API mfbmvol_status mfbmvol_path_simulate(const mfbmvol_model_params* params,
                                                 const mfbmvol_grid* grid, mfbmvol_seed seed,
                                                 mfbmvol_path** out);
/* count observations (count - 1 intervals); times must be equispaced. */
MFBMVOL_API mfbmvol_status mfbmvol_path_from_levels(const double* times, const double* levels,
                                                    size_t count, mfbmvol_path** out);
MFBMVOL_API mfbmvol_status mfbmvol_path_from_csv(const char* csv_text, mfbmvol_path** out);
MFBMVOL_API mfbmvol_status mfbmvol_path_to_csv(const mfbmvol_path* path, char** out);
MFBMVOL_API size_t mfbmvol_path_intervals(const mfbmvol_path* path);
/* Arrays owned by the path: n + 1 times and levels, n log-returns. */
MFBMVOL_API const double* mfbmvol_path_times(const mfbmvol_path* path);
MFBMVOL_API const double* mfbmvol_path_levels(const mfbmvol_path* path);
MFBMVOL_API const double* mfbmvol_path_log_returns(const mfbmvol_path* path);
MFBMVOL_API void mfbmvol_path_free(mfbmvol_path* path);

/* ---- estimators --------------------------------------------------------- */

typedef struct mfbmvol_estimate {
  double sigma2_hat;
  double normalizing_factor;
  double sum_sq_log_returns;
  size_t n;
  double hurst;
} mfbmvol_estimate;

MFBMVOL_API mfbmvol_status mfbmvol_normalizing_factor(size_t n, double hurst, double* out);
MFBMVOL_API mfbmvol_status mfbmvol_estimate_sigma2(const mfbmvol_path* path, double hurst,
                                                   mfbmvol_estimate* out);
/* Fills sigma2_hat with Sun's interval estimator and normalizing_factor with
 * 1 / (t2 - t1 + t2^H - t1^H). */
MFBMVOL_API mfbmvol_status mfbmvol_estimate_sigma2_sun(const mfbmvol_path* path, double t1,
                                                       double t2, double hurst,
                                                       mfbmvol_estimate* out);
MFBMVOL_API mfbmvol_status mfbmvol_standardized_statistic(const mfbmvol_estimate* estimate,
                                                          double true_sigma2, double* f_n,
                                                          double* c);

/* ---- exact analytics ---------------------------------------------------- */

typedef struct mfbmvol_moment_report {
  size_t n;
  double hurst;
  double sigma2;
  double mu;
  double exact_mean;
  double exact_variance;
  double u1_term;
  double t1_term;
  double var_u2_scaled;
  double var_s3_scaled;
  double c_asymptotic;
  int has_c_series; /* nonzero when hurst < 1/2 */
  double c_series;
} mfbmvol_moment_report;

MFBMVOL_API mfbmvol_status mfbmvol_exact_moments(size_t n, double hurst, double sigma2,
                                                 double mu, mfbmvol_moment_report* out);
MFBMVOL_API mfbmvol_status mfbmvol_moment_report_to_json(const mfbmvol_moment_report* report,
                                                         char** out);
MFBMVOL_API mfbmvol_status mfbmvol_limit_variance_series(double hurst, double sigma2,
                                                         uint64_t k_max, double* out);
MFBMVOL_API double mfbmvol_be_limit_curve(double x);
MFBMVOL_API mfbmvol_status mfbmvol_be_curve_to_csv(const double* xs, size_t count, char** out);
MFBMVOL_API mfbmvol_status mfbmvol_psi_rate(size_t n, double* out);
MFBMVOL_API double mfbmvol_normal_cdf(double x);
/* KS distance of a sorted sample from the standard normal. */
MFBMVOL_API mfbmvol_status mfbmvol_ks_statistic_normal(const double* sorted, size_t count,
                                                       double* out);

/* ---- Monte Carlo experiments ------------------------------------------- */

typedef struct mfbmvol_report mfbmvol_report;

/* config_json follows the experiment config file schema. workers = 0 uses
 * the default worker count (hardware threads capped by MFBMVOL_THREADS). */
MFBMVOL_API mfbmvol_status mfbmvol_experiment_run(const char* config_json, unsigned workers,
                                                  mfbmvol_report** out);
MFBMVOL_API mfbmvol_status mfbmvol_report_to_json(const mfbmvol_report* report, char** out);
MFBMVOL_API mfbmvol_status mfbmvol_report_to_csv(const mfbmvol_report* report, char** out);
MFBMVOL_API int mfbmvol_report_gates_passed(const mfbmvol_report* report);
MFBMVOL_API size_t mfbmvol_report_row_count(const mfbmvol_report* report);
MFBMVOL_API size_t mfbmvol_report_warning_count(const mfbmvol_report* report);
MFBMVOL_API const char* mfbmvol_report_warning(const mfbmvol_report* report, size_t index);
MFBMVOL_API double mfbmvol_report_elapsed_seconds(const mfbmvol_report* report);
MFBMVOL_API void mfbmvol_report_free(mfbmvol_report* report);

#ifdef __cplusplus
}
#endif

#endif /* MFBMVOL_H */
