#include "mfbmvol/harness.hpp"

#include "mfbmvol/errors.hpp"
#include "mfbmvol/estimator.hpp"
#include "mfbmvol/fgn.hpp"
#include "mfbmvol/mfbm.hpp"
#include "mfbmvol/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <sstream>

namespace mfbmvol {

namespace {

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

// Ordered two-pass moments; sample variance with M - 1 (zero when M = 1).
Moments sample_moments(std::span<const double> xs) {
  Moments m;
  for (double x : xs) m.mean += x;
  m.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    for (double x : xs) m.variance += (x - m.mean) * (x - m.mean);
    m.variance /= static_cast<double>(xs.size() - 1);
  }
  return m;
}

GateResult within(std::string name, double value, double lower, double upper) {
  return GateResult{std::move(name), value, lower, upper, value >= lower && value <= upper};
}

void expect_kind(const ExperimentConfig& cfg, ExperimentKind kind) {
  cfg.validate();
  if (cfg.kind != kind) {
    std::ostringstream os;
    os << "experiment kind is " << to_string(cfg.kind) << ", expected " << to_string(kind);
    fail(ErrorCode::config, os.str());
  }
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// Iterate cells in (N outer, H inner) order; the cell index picks substreams.
template <typename Fn>
void for_each_cell(const ExperimentConfig& cfg, Fn&& fn) {
  std::uint32_t cell = 0;
  for (std::size_t n : cfg.n_list) {
    for (double h : cfg.h_list) fn(h, n, cell++);
  }
}

ExperimentRow base_row(const ExperimentConfig& cfg, double h, std::size_t n,
                       std::span<const double> estimates, const MomentReport& exact) {
  ExperimentRow row;
  row.h = h;
  row.n = n;
  row.target = cfg.sigma2;
  const Moments m = sample_moments(estimates);
  row.mean = m.mean;
  row.variance = m.variance;
  row.mse = m.variance + (m.mean - cfg.sigma2) * (m.mean - cfg.sigma2);
  row.exact_mean = exact.exact_mean;
  row.exact_variance = exact.exact_variance;
  return row;
}

std::vector<double> standardized(std::span<const double> estimates, double center,
                                 double scale) {
  std::vector<double> f(estimates.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = (estimates[i] - center) / scale;
  return f;
}

}  // namespace

std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::table: return "table";
    case ExperimentKind::table_unnormalized: return "table_unnormalized";
    case ExperimentKind::clt: return "clt";
    case ExperimentKind::berry_esseen: return "berry_esseen";
    case ExperimentKind::as_convergence: return "as_convergence";
  }
  return "unknown";
}

ExperimentKind parse_experiment_kind(std::string_view name) {
  for (auto k : {ExperimentKind::table, ExperimentKind::table_unnormalized, ExperimentKind::clt,
                 ExperimentKind::berry_esseen, ExperimentKind::as_convergence}) {
    if (name == to_string(k)) return k;
  }
  fail(ErrorCode::config, "unknown experiment kind '" + std::string(name) + "'");
}

void ExperimentConfig::validate() const {
  auto check = [](bool ok, const char* what) {
    if (!ok) fail(ErrorCode::config, what);
  };
  check(std::isfinite(sigma2) && sigma2 > 0.0, "sigma2 must be positive");
  check(std::isfinite(mu), "mu must be finite");
  check(!h_list.empty(), "h_list must not be empty");
  for (double h : h_list) check(h > 0.0 && h < 1.0, "every H must lie in (0, 1)");
  check(!n_list.empty(), "n_list must not be empty");
  for (std::size_t n : n_list) check(n >= 1 && n <= kAnalyticCap, "every N must lie in [1, 65536]");
  check(replications >= 1, "replications must be at least 1");
  check(h_list.size() * n_list.size() < (std::size_t{1} << 31), "too many experiment cells");
  auto unique = [](auto v) {
    std::sort(v.begin(), v.end());
    return std::adjacent_find(v.begin(), v.end()) == v.end();
  };
  check(unique(h_list) && unique(n_list), "h_list and n_list must not repeat values");
  switch (kind) {
    case ExperimentKind::table:
    case ExperimentKind::table_unnormalized:
      check(n_list.size() == 1, "table experiments take exactly one N");
      break;
    case ExperimentKind::berry_esseen:
      check(!x_grid.empty(), "berry_esseen needs a non-empty x_grid");
      check(h_list.size() == 1, "berry_esseen takes exactly one H");
      break;
    case ExperimentKind::as_convergence:
      check(delta.has_value() && std::isfinite(*delta), "as_convergence needs delta");
      break;
    case ExperimentKind::clt: break;
  }
}

bool ExperimentReport::gates_passed() const {
  for (const auto& row : rows) {
    for (const auto& g : row.gates) {
      if (!g.passed) return false;
    }
  }
  return true;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double ks_statistic(std::span<const double> sorted, const std::function<double(double)>& cdf) {
  require(!sorted.empty(), "KS statistic needs a nonempty sample");
  const double m = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    const double above = static_cast<double>(i + 1) / m - f;
    const double below = f - static_cast<double>(i) / m;
    d = std::max({d, std::abs(above), std::abs(below)});
  }
  return d;
}

double delta_regime_limit(double h) {
  if (h < 0.25) return 2.0 * h + 0.5;
  if (h < 0.5) return h;
  return 0.5;
}

std::vector<double> simulate_estimates(const ExperimentConfig& cfg, double h_value,
                                       std::size_t n, std::uint32_t cell,
                                       const RunOptions& opts) {
  const HurstParameter h(h_value);
  const GridSpec grid{n, 0.0, 1.0};
  const MixWeights weights{};
  ModelParams params;
  params.mu = cfg.mu;
  params.sigma2 = cfg.sigma2;
  params.h = h;
  const CirculantFgnSampler fgn(h, n);
  const std::uint32_t brownian_tag = 2 * cell;
  const std::uint32_t fgn_tag = 2 * cell + 1;

  std::vector<double> estimates(cfg.replications);
  parallel_for(cfg.replications, opts.workers, [&](std::size_t rep) {
    const RngSeed seed{cfg.master_seed, rep, 0};
    std::vector<double> dm(n);
    sample_mfbm_increments(grid, weights, fgn, seed, brownian_tag, fgn_tag, dm);
    const SamplePath path = price_path(params, dm, grid);
    estimates[rep] = estimate_sigma2(path, h).sigma2_hat;
  });
  return estimates;
}

ExperimentReport run_table_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
  expect_kind(cfg, ExperimentKind::table);
  const Stopwatch clock;
  ExperimentReport report{cfg, {}, {}, 0.0};
  const double m = static_cast<double>(cfg.replications);

  for_each_cell(cfg, [&](double h, std::size_t n, std::uint32_t cell) {
    const auto estimates = simulate_estimates(cfg, h, n, cell, opts);
    const MomentReport exact = exact_var_sigma2(n, HurstParameter(h), cfg.sigma2, cfg.mu);
    ExperimentRow row = base_row(cfg, h, n, estimates, exact);

    const double se = std::sqrt(exact.exact_variance / m);
    const double half_width = std::max(gates::kStandardErrors * se,
                                       gates::kMeanRelativeFloor * cfg.sigma2);
    row.gates.push_back(within("mean", row.mean, cfg.sigma2 - half_width, cfg.sigma2 + half_width));
    row.gates.push_back(within("variance", row.variance,
                               (1.0 - gates::kVarianceRelative) * exact.exact_variance,
                               (1.0 + gates::kVarianceRelative) * exact.exact_variance));
    row.gates.push_back(within("oracle_mean", row.mean, exact.exact_mean - gates::kStandardErrors * se,
                               exact.exact_mean + gates::kStandardErrors * se));
    report.rows.push_back(std::move(row));
  });
  report.elapsed_seconds = clock.seconds();
  return report;
}

ExperimentReport run_table_unnormalized(const ExperimentConfig& cfg, const RunOptions& opts) {
  expect_kind(cfg, ExperimentKind::table_unnormalized);
  const Stopwatch clock;
  ExperimentReport report{cfg, {}, {}, 0.0};
  const double m = static_cast<double>(cfg.replications);

  for_each_cell(cfg, [&](double h, std::size_t n, std::uint32_t cell) {
    const HurstParameter hp(h);
    if (h <= 0.5) {
      std::ostringstream os;
      os << "unnormalized table at H=" << h << " <= 1/2: the raw sum diverges as N grows";
      report.warnings.push_back(os.str());
    }
    auto estimates = simulate_estimates(cfg, h, n, cell, opts);
    const double factor = normalizing_factor(n, hp);
    for (double& e : estimates) e /= factor;

    MomentReport exact = exact_var_sigma2(n, hp, cfg.sigma2, cfg.mu);
    exact.exact_mean /= factor;
    exact.exact_variance /= factor * factor;
    ExperimentRow row = base_row(cfg, h, n, estimates, exact);

    const double bias_mean =
        cfg.sigma2 * (1.0 + std::pow(static_cast<double>(n), 1.0 - 2.0 * h));
    row.gates.push_back(within("bias_mean", row.mean, (1.0 - gates::kUnnormalizedBias) * bias_mean,
                               (1.0 + gates::kUnnormalizedBias) * bias_mean));
    const double se = std::sqrt(exact.exact_variance / m);
    row.gates.push_back(within("oracle_mean", row.mean, exact.exact_mean - gates::kStandardErrors * se,
                               exact.exact_mean + gates::kStandardErrors * se));
    report.rows.push_back(std::move(row));
  });
  report.elapsed_seconds = clock.seconds();
  return report;
}

ExperimentReport run_clt_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
  expect_kind(cfg, ExperimentKind::clt);
  const Stopwatch clock;
  ExperimentReport report{cfg, {}, {}, 0.0};
  const double c = asymptotic_variance_c(cfg.sigma2);

  for_each_cell(cfg, [&](double h, std::size_t n, std::uint32_t cell) {
    const auto estimates = simulate_estimates(cfg, h, n, cell, opts);
    const MomentReport exact = exact_var_sigma2(n, HurstParameter(h), cfg.sigma2, cfg.mu);
    ExperimentRow row = base_row(cfg, h, n, estimates, exact);
    const double nd = static_cast<double>(n);

    auto f = standardized(estimates, cfg.sigma2, std::sqrt(c / nd));
    const Moments fm = sample_moments(f);
    row.f_mean = fm.mean;
    row.f_variance = fm.variance;
    row.f_variance_predicted = nd * exact.exact_variance / c;
    std::sort(f.begin(), f.end());
    row.ks_distance = ks_statistic(f, normal_cdf);

    auto g = standardized(estimates, cfg.sigma2, std::sqrt(exact.exact_variance));
    std::sort(g.begin(), g.end());
    row.ks_distance_exact = ks_statistic(g, normal_cdf);

    row.gates.push_back(within("ks", *row.ks_distance, 0.0, gates::kKsMax));
    if (h >= 0.5) {
      row.gates.push_back(within("f_variance", *row.f_variance,
                                 1.0 - gates::kCltVarianceTolerance,
                                 1.0 + gates::kCltVarianceTolerance));
    }
    report.rows.push_back(std::move(row));
  });
  report.elapsed_seconds = clock.seconds();
  return report;
}

ExperimentReport run_berry_esseen_experiment(const ExperimentConfig& cfg,
                                             const RunOptions& opts) {
  expect_kind(cfg, ExperimentKind::berry_esseen);
  const Stopwatch clock;
  ExperimentReport report{cfg, {}, {}, 0.0};
  const double c = asymptotic_variance_c(cfg.sigma2);
  const double m = static_cast<double>(cfg.replications);

  for_each_cell(cfg, [&](double h, std::size_t n, std::uint32_t cell) {
    const auto estimates = simulate_estimates(cfg, h, n, cell, opts);
    const MomentReport exact = exact_var_sigma2(n, HurstParameter(h), cfg.sigma2, cfg.mu);
    ExperimentRow row = base_row(cfg, h, n, estimates, exact);
    const double root_n = std::sqrt(static_cast<double>(n));

    auto f = standardized(estimates, cfg.sigma2, std::sqrt(c) / root_n);
    const Moments fm = sample_moments(f);
    row.f_mean = fm.mean;
    row.f_variance = fm.variance;
    std::sort(f.begin(), f.end());
    row.ks_distance = ks_statistic(f, normal_cdf);
    row.scaled_sup_distance = root_n * *row.ks_distance;

    for (double x : cfg.x_grid) {
      const auto below = std::upper_bound(f.begin(), f.end(), x) - f.begin();
      BeCurvePoint p;
      p.x = x;
      p.probability = static_cast<double>(below) / m;
      p.scaled_deviation = root_n * (p.probability - normal_cdf(x));
      p.target = be_limit_curve(x);
      row.be_curve.push_back(p);

      const double phi = normal_cdf(x);
      const double tol = gates::kBerryEsseenSlack +
                         gates::kStandardErrors * root_n * std::sqrt(phi * (1.0 - phi) / m);
      std::ostringstream name;
      name << "be_curve(x=" << x << ")";
      row.gates.push_back(within(name.str(), p.scaled_deviation, p.target - tol, p.target + tol));
    }
    report.rows.push_back(std::move(row));
  });
  report.elapsed_seconds = clock.seconds();
  return report;
}

ExperimentReport run_as_convergence_experiment(const ExperimentConfig& cfg,
                                               const RunOptions& opts) {
  expect_kind(cfg, ExperimentKind::as_convergence);
  const Stopwatch clock;
  ExperimentReport report{cfg, {}, {}, 0.0};
  const double delta = *cfg.delta;

  for (double h : cfg.h_list) {
    if (!(delta < delta_regime_limit(h))) {
      std::ostringstream os;
      os << "delta=" << delta << " violates the regime bound " << delta_regime_limit(h)
         << " at H=" << h;
      report.warnings.push_back(os.str());
    }
  }

  for_each_cell(cfg, [&](double h, std::size_t n, std::uint32_t cell) {
    const auto estimates = simulate_estimates(cfg, h, n, cell, opts);
    const MomentReport exact = exact_var_sigma2(n, HurstParameter(h), cfg.sigma2, cfg.mu);
    ExperimentRow row = base_row(cfg, h, n, estimates, exact);
    const double threshold = std::pow(static_cast<double>(n), -delta);
    std::size_t exceed = 0;
    for (double e : estimates) exceed += std::abs(e - cfg.sigma2) > threshold ? 1 : 0;
    row.exceedance_threshold = threshold;
    row.exceedance_fraction =
        static_cast<double>(exceed) / static_cast<double>(estimates.size());
    row.delta_valid = delta < delta_regime_limit(h);
    report.rows.push_back(std::move(row));
  });

  // Per-H gates along increasing N, attached to the row with the largest N.
  for (double h : cfg.h_list) {
    std::vector<ExperimentRow*> series;
    for (auto& row : report.rows) {
      if (row.h == h) series.push_back(&row);
    }
    std::sort(series.begin(), series.end(),
              [](const ExperimentRow* a, const ExperimentRow* b) { return a->n < b->n; });
    std::size_t violations = 0;
    for (std::size_t i = 1; i < series.size(); ++i) {
      if (!(*series[i]->exceedance_fraction < *series[i - 1]->exceedance_fraction)) ++violations;
    }
    ExperimentRow& last = *series.back();
    last.gates.push_back(within("strictly_decreasing_violations",
                                static_cast<double>(violations), 0.0, 0.0));
    last.gates.push_back(GateResult{"final_exceedance", *last.exceedance_fraction, 0.0,
                                    gates::kFinalExceedanceMax,
                                    *last.exceedance_fraction < gates::kFinalExceedanceMax});
  }
  report.elapsed_seconds = clock.seconds();
  return report;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
  switch (cfg.kind) {
    case ExperimentKind::table: return run_table_experiment(cfg, opts);
    case ExperimentKind::table_unnormalized: return run_table_unnormalized(cfg, opts);
    case ExperimentKind::clt: return run_clt_experiment(cfg, opts);
    case ExperimentKind::berry_esseen: return run_berry_esseen_experiment(cfg, opts);
    case ExperimentKind::as_convergence: return run_as_convergence_experiment(cfg, opts);
  }
  fail(ErrorCode::config, "unknown experiment kind");
}

}  // namespace mfbmvol
