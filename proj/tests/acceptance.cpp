// Acceptance suite: one PASS/FAIL line per criterion.
//
// Exit status is 0 when every failing check is on the known-unattainable
// list (see README), 1 otherwise.

#include "mfbmvol/analytics.hpp"
#include "mfbmvol/fgn.hpp"
#include "mfbmvol/harness.hpp"
#include "mfbmvol/report_io.hpp"

#include "support.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

using namespace mfbmvol;

namespace {

const std::vector<double> kHs{0.25, 0.45, 0.55, 0.75, 0.95};

struct Check {
  std::string what;
  bool ok = false;
  bool unattainable = false;  // failure is expected and analysed
};

struct Criterion {
  explicit Criterion(std::string n) : name(std::move(n)) {}

  std::string name;
  std::vector<Check> checks;
  double seconds = 0.0;

  void add(std::string what, bool ok, bool unattainable = false) {
    checks.push_back(Check{std::move(what), ok, unattainable});
  }
  bool passed() const {
    for (const auto& c : checks) {
      if (!c.ok) return false;
    }
    return true;
  }
  bool unexpected_failure() const {
    for (const auto& c : checks) {
      if (!c.ok && !c.unattainable) return true;
    }
    return false;
  }
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ExperimentConfig config(ExperimentKind kind, double sigma2, std::vector<double> hs,
                        std::vector<std::size_t> ns, std::size_t reps, std::uint64_t seed) {
  ExperimentConfig c;
  c.kind = kind;
  c.sigma2 = sigma2;
  c.h_list = std::move(hs);
  c.n_list = std::move(ns);
  c.replications = reps;
  c.master_seed = seed;
  return c;
}

Criterion table_reproduction(const RunOptions& opts) {
  Criterion cr{"table_reproduction"};
  const auto t0 = std::chrono::steady_clock::now();
  const double sigmas[] = {0.4, 1.6, 6.4};
  for (std::size_t s = 0; s < 3; ++s) {
    const double sigma2 = sigmas[s];
    const auto rep = run_table_experiment(
        config(ExperimentKind::table, sigma2, kHs, {1000}, 200, 20250 + s), opts);
    for (const auto& row : rep.rows) {
      const double tol = std::max(4.0 * std::sqrt(row.exact_variance / 200.0), 0.01 * sigma2);
      const double dm = std::abs(row.mean - sigma2);
      const double rv = row.variance / row.exact_variance - 1.0;
      cr.add(fmt("sigma2=%.1f H=%.2f mean=%.7g |dev|=%.3g tol=%.3g", sigma2, row.h, row.mean, dm,
                 tol),
             dm <= tol);
      cr.add(fmt("sigma2=%.1f H=%.2f var=%.5g exact=%.5g rel=%+.3f", sigma2, row.h, row.variance,
                 row.exact_variance, rv),
             std::abs(rv) <= 0.35);
    }
  }
  cr.seconds = seconds_since(t0);
  cr.add(fmt("runtime %.2fs <= 60s", cr.seconds), cr.seconds <= 60.0);
  return cr;
}

Criterion unnormalized_bias(const RunOptions& opts) {
  Criterion cr{"unnormalized_bias"};
  const auto t0 = std::chrono::steady_clock::now();
  const double sigmas[] = {0.4, 1.6, 6.4};
  for (std::size_t s = 0; s < 3; ++s) {
    const double sigma2 = sigmas[s];
    const auto rep = run_table_unnormalized(
        config(ExperimentKind::table_unnormalized, sigma2, {0.55, 0.75, 0.95}, {1000}, 200,
               30250 + s),
        opts);
    for (const auto& row : rep.rows) {
      const double target = sigma2 * (1.0 + std::pow(1000.0, 1.0 - 2.0 * row.h));
      const double rel = row.mean / target - 1.0;
      cr.add(fmt("sigma2=%.1f H=%.2f mean=%.7g target=%.7g rel=%+.4f", sigma2, row.h, row.mean,
                 target, rel),
             std::abs(rel) <= 0.015);
    }
  }
  cr.seconds = seconds_since(t0);
  return cr;
}

Criterion exact_moment_oracle() {
  Criterion cr{"exact_moment_oracle"};
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (double sigma2 : {0.4, 1.0, 6.4}) {
    for (std::size_t n : {10, 100, 1000}) {
      const double nd = static_cast<double>(n);
      const double closed = 2 * sigma2 * sigma2 / nd + 2 * std::pow(sigma2, 3) / (nd * nd);
      const double v = exact_var_sigma2(n, HurstParameter(0.5), sigma2).exact_variance;
      worst = std::max(worst, std::abs(v - closed) / closed);
    }
  }
  cr.add(fmt("H=0.5 closed form: worst rel %.2e <= 1e-12", worst), worst <= 1e-12);

  double worst_toeplitz = 0.0;
  for (double h : kHs) {
    for (std::size_t n : {1, 2, 3, 10, 64, 100, 256, 512}) {
      const auto fast = exact_var_sigma2(n, HurstParameter(h), 0.4);
      const auto slow = exact_var_sigma2_bruteforce(n, HurstParameter(h), 0.4);
      worst_toeplitz = std::max(
          worst_toeplitz, std::abs(fast.exact_variance - slow.exact_variance) / slow.exact_variance);
    }
  }
  cr.add(fmt("Toeplitz vs brute force: worst rel %.2e <= 1e-10", worst_toeplitz),
         worst_toeplitz <= 1e-10);
  cr.seconds = seconds_since(t0);
  return cr;
}

Criterion clt(const RunOptions& opts) {
  Criterion cr{"clt"};
  const auto t0 = std::chrono::steady_clock::now();
  const auto rep =
      run_clt_experiment(config(ExperimentKind::clt, 0.4, kHs, {1000}, 2000, 40250), opts);
  for (const auto& row : rep.rows) {
    cr.add(fmt("H=%.2f KS=%.4f <= 0.06", row.h, *row.ks_distance), *row.ks_distance <= 0.06);
    if (row.h >= 0.5) {
      cr.add(fmt("H=%.2f var(F_N)=%.4f |.-1| <= 0.15", row.h, *row.f_variance),
             std::abs(*row.f_variance - 1.0) <= 0.15);
    } else {
      cr.add(fmt("H=%.2f both standardizations reported (KS exact-variance %.4f)", row.h,
                 row.ks_distance_exact.value_or(NAN)),
             row.ks_distance.has_value() && row.ks_distance_exact.has_value());
    }
  }
  cr.seconds = seconds_since(t0);
  cr.add(fmt("runtime %.2fs <= 120s", cr.seconds), cr.seconds <= 120.0);
  return cr;
}

Criterion asymptotic_constant() {
  Criterion cr{"asymptotic_constant"};
  const auto t0 = std::chrono::steady_clock::now();
  for (double h : {0.5, 0.55, 0.75, 0.95}) {
    for (double sigma2 : {0.4, 1.0}) {
      const double c = 2 * sigma2 * sigma2;
      const double v256 = exact_var_sigma2(256, HurstParameter(h), sigma2).var_s3_scaled;
      const double v4096 = exact_var_sigma2(4096, HurstParameter(h), sigma2).var_s3_scaled;
      const double rel = std::abs(v4096 - c) / c;
      cr.add(fmt("H=%.2f sigma2=%.1f N=4096 rel %.4f <= 0.05", h, sigma2, rel), rel <= 0.05);
      cr.add(fmt("H=%.2f sigma2=%.1f |dev| N=256 %.3g >= N=4096 %.3g", h, sigma2,
                 std::abs(v256 - c), std::abs(v4096 - c)),
             std::abs(v4096 - c) <= std::abs(v256 - c));
    }
  }
  cr.seconds = seconds_since(t0);
  cr.add(fmt("runtime %.3fs <= 1s", cr.seconds), cr.seconds <= 1.0);
  return cr;
}

Criterion berry_esseen(const RunOptions& opts) {
  Criterion cr{"berry_esseen"};
  const auto t0 = std::chrono::steady_clock::now();
  constexpr std::size_t n = 256;
  constexpr std::size_t m = 500'000;
  auto cfg = config(ExperimentKind::berry_esseen, 1.0, {0.5}, {n}, m, 50250);
  cfg.x_grid = {0.0, 1.0};
  const auto rep = run_berry_esseen_experiment(cfg, opts);
  const auto& curve = rep.rows.at(0).be_curve;
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  const double tol0 = 0.05 + 4.0 * sqrt_n * std::sqrt(0.25 / m);
  const double d0 = curve.at(0).scaled_deviation;
  cr.add(fmt("x=0 sqrt(N)(P-Phi)=%.4f in 0.0940 +- %.4f", d0, tol0),
         std::abs(d0 - 0.0940) <= tol0);
  const double d1 = curve.at(1).scaled_deviation;
  cr.add(fmt("x=1 sqrt(N)(P-Phi)=%.4f in 0 +- 0.05", d1), std::abs(d1) <= 0.05, true);
  cr.seconds = seconds_since(t0);
  cr.add(fmt("runtime %.1fs <= 600s", cr.seconds), cr.seconds <= 600.0);
  return cr;
}

Criterion as_convergence(const RunOptions& opts) {
  Criterion cr{"as_convergence"};
  const auto t0 = std::chrono::steady_clock::now();
  struct Case {
    double h, delta;
    bool unattainable;
  };
  const Case cases[] = {{0.75, 0.4, true}, {0.25, 0.2, true}, {0.45, 0.3, false}};
  std::uint64_t seed = 60250;
  for (const auto& c : cases) {
    auto cfg = config(ExperimentKind::as_convergence, 1.0, {c.h}, {256, 1024, 4096}, 2000, seed++);
    cfg.delta = c.delta;
    const auto rep = run_as_convergence_experiment(cfg, opts);
    std::vector<double> frac;
    for (const auto& row : rep.rows) frac.push_back(*row.exceedance_fraction);
    bool decreasing = true;
    for (std::size_t i = 1; i < frac.size(); ++i) decreasing = decreasing && frac[i] < frac[i - 1];
    cr.add(fmt("H=%.2f delta=%.1f fractions %.4f %.4f %.4f strictly decreasing", c.h, c.delta,
               frac[0], frac[1], frac[2]),
           decreasing, c.unattainable);
    cr.add(fmt("H=%.2f delta=%.1f final %.4f < 0.01", c.h, c.delta, frac.back()),
           frac.back() < 0.01, c.unattainable);
  }
  cr.seconds = seconds_since(t0);
  return cr;
}

Criterion sampler_validation() {
  Criterion cr{"sampler_validation"};
  const auto t0 = std::chrono::steady_clock::now();
  constexpr std::size_t n = 256;
  constexpr std::size_t reps = 10'000;
  constexpr std::size_t max_lag = 5;
  for (double h : kHs) {
    const CirculantFgnSampler circ(HurstParameter(h), n);
    const CholeskyFgnSampler chol(HurstParameter(h), n);
    const auto a = testsupport::lag_products(
        reps, max_lag, [&](std::size_t r) { return circ.sample(RngSeed{70250, r, 0}); });
    const auto b = testsupport::lag_products(
        reps, max_lag, [&](std::size_t r) { return chol.sample(RngSeed{70251, r, 0}); });
    double worst = 0.0;
    for (std::size_t k = 0; k <= max_lag; ++k) {
      const double target = testsupport::gamma_h(static_cast<double>(k), h);
      const auto ca = testsupport::mean_se(a[k]);
      const auto cb = testsupport::mean_se(b[k]);
      worst = std::max({worst, std::abs(ca.mean - target) / ca.se,
                        std::abs(cb.mean - target) / cb.se,
                        std::abs(ca.mean - cb.mean) / std::hypot(ca.se, cb.se)});
    }
    cr.add(fmt("H=%.2f lags 0..5 worst deviation %.2f SE <= 4", h, worst), worst <= 4.0);
  }
  cr.seconds = seconds_since(t0);
  return cr;
}

Criterion determinism() {
  Criterion cr{"determinism"};
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<ExperimentConfig> cfgs{
      config(ExperimentKind::table, 0.4, kHs, {500}, 64, 80250),
      config(ExperimentKind::table_unnormalized, 1.6, {0.55, 0.95}, {300}, 64, 80251),
      config(ExperimentKind::clt, 0.4, {0.25, 0.75}, {200, 400}, 128, 80252),
  };
  auto be = config(ExperimentKind::berry_esseen, 1.0, {0.5}, {64}, 256, 80253);
  be.x_grid = {-1.0, 0.0, 1.0};
  cfgs.push_back(be);
  auto as = config(ExperimentKind::as_convergence, 1.0, {0.45}, {64, 128}, 128, 80254);
  as.delta = 0.3;
  cfgs.push_back(as);
  for (const auto& cfg : cfgs) {
    const auto one = run_experiment(cfg, RunOptions{1});
    const auto json1 = report_to_json(one);
    const auto csv1 = report_to_csv(one);
    bool same = true;
    for (unsigned w : {2u, 5u, 16u}) {
      const auto other = run_experiment(cfg, RunOptions{w});
      same = same && report_to_json(other) == json1 && report_to_csv(other) == csv1;
    }
    cr.add(fmt("%s: JSON and CSV identical for 1, 2, 5, 16 workers",
               std::string(to_string(cfg.kind)).c_str()),
           same);
  }
  cr.seconds = seconds_since(t0);
  return cr;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mfbmvol acceptance suite"};
  bool slow = false;
  bool verbose = false;
  unsigned workers = 0;
  std::vector<std::string> only;
  app.add_flag("--slow", slow, "include the long Berry-Esseen run");
  app.add_flag("-v,--verbose", verbose, "print every check, not only failures");
  app.add_option("--workers", workers, "worker threads (0: hardware concurrency)");
  app.add_option("--only", only, "run only the named criteria");
  CLI11_PARSE(app, argc, argv);
  if (const char* env = std::getenv("MFBMVOL_SLOW_TESTS"); env && *env && std::string(env) != "0") {
    slow = true;
  }

  const RunOptions opts{workers};
  const std::vector<std::pair<std::string, std::function<Criterion()>>> all{
      {"table_reproduction", [&] { return table_reproduction(opts); }},
      {"unnormalized_bias", [&] { return unnormalized_bias(opts); }},
      {"exact_moment_oracle", [] { return exact_moment_oracle(); }},
      {"clt", [&] { return clt(opts); }},
      {"asymptotic_constant", [] { return asymptotic_constant(); }},
      {"berry_esseen", [&] { return berry_esseen(opts); }},
      {"as_convergence", [&] { return as_convergence(opts); }},
      {"sampler_validation", [] { return sampler_validation(); }},
      {"determinism", [] { return determinism(); }},
  };

  bool unexpected = false;
  for (const auto& [name, run] : all) {
    if (!only.empty() && std::find(only.begin(), only.end(), name) == only.end()) continue;
    if (name == "berry_esseen" && !slow && only.empty()) {
      std::printf("SKIP %-20s (opt-in: --slow or MFBMVOL_SLOW_TESTS=1)\n", name.c_str());
      continue;
    }
    const auto cr = run();
    const bool known = !cr.passed() && !cr.unexpected_failure();
    std::printf("%s %-20s %7.2fs%s\n", cr.passed() ? "PASS" : "FAIL", cr.name.c_str(), cr.seconds,
                known ? "  (known unattainable, see README)" : "");
    for (const auto& c : cr.checks) {
      if (verbose || !c.ok) {
        std::printf("     %s %s%s\n", c.ok ? "ok  " : "FAIL", c.what.c_str(),
                    !c.ok && c.unattainable ? " [known]" : "");
      }
    }
    std::fflush(stdout);
    unexpected = unexpected || cr.unexpected_failure();
  }
  return unexpected ? 1 : 0;
}
