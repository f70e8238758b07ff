#pragma once

#include "mfbmvol/analytics.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mfbmvol {

enum class ExperimentKind { table, table_unnormalized, clt, berry_esseen, as_convergence };

std::string_view to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(std::string_view name);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::table;
  double sigma2 = 0.0;
  double mu = 0.0;
  std::vector<double> h_list;
  std::vector<std::size_t> n_list;
  std::size_t replications = 0;
  std::uint64_t master_seed = 0;
  std::vector<double> x_grid;   // berry_esseen only
  std::optional<double> delta;  // as_convergence only

  /// Throws ErrorCode::config on a malformed configuration.
  void validate() const;
};

/// Statistical gate tolerances.
namespace gates {
inline constexpr double kStandardErrors = 4.0;
inline constexpr double kMeanRelativeFloor = 0.01;
inline constexpr double kVarianceRelative = 0.35;
inline constexpr double kUnnormalizedBias = 0.015;
inline constexpr double kKsMax = 0.06;
inline constexpr double kCltVarianceTolerance = 0.15;
inline constexpr double kBerryEsseenSlack = 0.05;
inline constexpr double kFinalExceedanceMax = 0.01;
}  // namespace gates

struct GateResult {
  std::string name;
  double value = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool passed = false;
};

struct BeCurvePoint {
  double x = 0.0;
  double probability = 0.0;       // empirical P(F_N <= x)
  double scaled_deviation = 0.0;  // sqrt(N) (probability - Phi(x))
  double target = 0.0;            // be_limit_curve(x)
};

/// One (H, N) cell. `mean`/`variance`/`mse` describe the statistic the
/// experiment reports (sigma2_hat, or the raw sum for table_unnormalized);
/// `exact_*` are the analytic moments of that same statistic.
struct ExperimentRow {
  double h = 0.0;
  std::size_t n = 0;
  double target = 0.0;
  double mean = 0.0;
  double variance = 0.0;
  double mse = 0.0;
  double exact_mean = 0.0;
  double exact_variance = 0.0;

  std::optional<double> ks_distance;        // F_N with c = 2 sigma^4
  std::optional<double> ks_distance_exact;  // standardized by the exact variance
  std::optional<double> f_mean;
  std::optional<double> f_variance;
  std::optional<double> f_variance_predicted;
  std::optional<double> scaled_sup_distance;  // sqrt(N) * KS
  std::vector<BeCurvePoint> be_curve;
  std::optional<double> exceedance_fraction;
  std::optional<double> exceedance_threshold;  // N^-delta
  std::optional<bool> delta_valid;

  std::vector<GateResult> gates;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<ExperimentRow> rows;
  std::vector<std::string> warnings;
  double elapsed_seconds = 0.0;  // not serialized

  bool gates_passed() const;
};

struct RunOptions {
  unsigned workers = 0;  // 0: default_worker_count()
};

/// Phi(x) = erfc(-x / sqrt 2) / 2; accurate to a few ulp across the range.
double normal_cdf(double x);

/// Kolmogorov-Smirnov distance of a sorted, nonempty sample from `cdf`.
double ks_statistic(std::span<const double> sorted, const std::function<double(double)>& cdf);

/// Upper bound on delta for the almost-sure rate at this H.
double delta_regime_limit(double h);

/// sigma2_hat for every replication of one (H, N) cell, in replication order.
/// `cell` selects the substreams, so distinct cells are independent.
std::vector<double> simulate_estimates(const ExperimentConfig& cfg, double h, std::size_t n,
                                       std::uint32_t cell, const RunOptions& opts);

ExperimentReport run_table_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {});
ExperimentReport run_table_unnormalized(const ExperimentConfig& cfg, const RunOptions& opts = {});
ExperimentReport run_clt_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {});
ExperimentReport run_berry_esseen_experiment(const ExperimentConfig& cfg,
                                             const RunOptions& opts = {});
ExperimentReport run_as_convergence_experiment(const ExperimentConfig& cfg,
                                               const RunOptions& opts = {});
ExperimentReport run_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {});

}  // namespace mfbmvol
