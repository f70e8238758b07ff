#include <doctest.h>

#include "mfbmvol/errors.hpp"
#include "mfbmvol/format.hpp"
#include "mfbmvol/harness.hpp"
#include "mfbmvol/parallel.hpp"
#include "mfbmvol/report_io.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>

using namespace mfbmvol;

namespace {

const boost::math::normal kStd;

ExperimentConfig make(ExperimentKind kind, double sigma2, std::vector<double> hs,
                      std::vector<std::size_t> ns, std::size_t reps, std::uint64_t seed = 42) {
  ExperimentConfig c;
  c.kind = kind;
  c.sigma2 = sigma2;
  c.h_list = std::move(hs);
  c.n_list = std::move(ns);
  c.replications = reps;
  c.master_seed = seed;
  return c;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an mfbmvol::Error");
  return ErrorCode::invalid_argument;
}

}  // namespace

TEST_CASE("normal cdf") {
  CHECK(normal_cdf(0.0) == 0.5);
  CHECK(std::abs(normal_cdf(8.0) - 1.0) <= 1e-10);
  CHECK(normal_cdf(1.0) == doctest::Approx(0.8413447460685429).epsilon(1e-15));
  for (double x = -12.0; x <= 12.0; x += 0.37) {
    CHECK(std::abs(normal_cdf(x) - boost::math::cdf(kStd, x)) <= 1e-10);
  }
}

TEST_CASE("KS statistic") {
  const std::vector<double> zero{0.0};
  CHECK(ks_statistic(zero, normal_cdf) == 0.5);

  const std::vector<double> quartiles{boost::math::quantile(kStd, 0.25),
                                      boost::math::quantile(kStd, 0.75)};
  CHECK(ks_statistic(quartiles, normal_cdf) == doctest::Approx(0.25).epsilon(1e-14));

  for (std::size_t m : {1, 2, 5, 50, 400}) {
    std::vector<double> q(m);
    for (std::size_t i = 0; i < m; ++i) q[i] = boost::math::quantile(kStd, (i + 0.5) / m);
    CHECK(ks_statistic(q, normal_cdf) == doctest::Approx(0.5 / m).epsilon(1e-12));
  }
  CHECK_THROWS_AS(ks_statistic(std::vector<double>{}, normal_cdf), Error);
}

TEST_CASE("delta regime limits") {
  CHECK(delta_regime_limit(0.1) == doctest::Approx(0.7));
  CHECK(delta_regime_limit(0.25) == 0.25);
  CHECK(delta_regime_limit(0.45) == 0.45);
  CHECK(delta_regime_limit(0.5) == 0.5);
  CHECK(delta_regime_limit(0.95) == 0.5);
}

TEST_CASE("experiment config validation") {
  auto good = make(ExperimentKind::table, 0.4, {0.5}, {100}, 10);
  good.validate();
  auto bad = good;
  bad.replications = 0;
  CHECK(code_of([&] { bad.validate(); }) == ErrorCode::config);
  bad = good;
  bad.h_list = {1.0};
  CHECK(code_of([&] { bad.validate(); }) == ErrorCode::config);
  bad = good;
  bad.sigma2 = -1;
  CHECK(code_of([&] { bad.validate(); }) == ErrorCode::config);
  bad = good;
  bad.n_list = {100, 200};
  CHECK(code_of([&] { bad.validate(); }) == ErrorCode::config);
  bad = good;
  bad.h_list = {0.5, 0.5};
  CHECK(code_of([&] { bad.validate(); }) == ErrorCode::config);
  bad = good;
  bad.kind = ExperimentKind::berry_esseen;
  CHECK(code_of([&] { bad.validate(); }) == ErrorCode::config);
  bad = good;
  bad.kind = ExperimentKind::as_convergence;
  CHECK(code_of([&] { bad.validate(); }) == ErrorCode::config);
  CHECK(code_of([&] { run_clt_experiment(good); }) == ErrorCode::config);
  CHECK(parse_experiment_kind("berry_esseen") == ExperimentKind::berry_esseen);
  CHECK(code_of([] { parse_experiment_kind("bogus"); }) == ErrorCode::config);
}

TEST_CASE("parallel_for visits every index once and propagates exceptions") {
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(hits.size(), 7, [&](std::size_t i) { hits[i]++; });
  for (auto& h : hits) CHECK(h.load() == 1);
  CHECK_THROWS_WITH(parallel_for(100, 4,
                                 [](std::size_t i) {
                                   if (i == 57) throw std::runtime_error("boom");
                                 }),
                    "boom");
  CHECK(default_worker_count() >= 1);
}

TEST_CASE("table: single replication is deterministic") {
  const auto cfg = make(ExperimentKind::table, 1.7, {0.3, 0.8}, {64}, 1, 9);
  const auto a = run_table_experiment(cfg);
  const auto b = run_table_experiment(cfg);
  CHECK(report_to_json(a) == report_to_json(b));
  CHECK(a.rows[0].variance == 0.0);
}

TEST_CASE("reports are identical for any worker count") {
  auto cfg = make(ExperimentKind::clt, 0.4, {0.25, 0.75}, {100, 300}, 300, 1234);
  const auto one = report_to_json(run_experiment(cfg, RunOptions{1}));
  CHECK(report_to_json(run_experiment(cfg, RunOptions{3})) == one);
  CHECK(report_to_json(run_experiment(cfg, RunOptions{8})) == one);
}

TEST_CASE("table: MSE identity and gates at moderate size") {
  const auto cfg = make(ExperimentKind::table, 0.4, {0.25, 0.45, 0.55, 0.75, 0.95}, {1000}, 200);
  const auto rep = run_table_experiment(cfg);
  REQUIRE(rep.rows.size() == 5);
  for (const auto& row : rep.rows) {
    const double bias = row.mean - 0.4;
    CHECK(row.mse == doctest::Approx(row.variance + bias * bias).epsilon(1e-12));
    CHECK(row.exact_mean == doctest::Approx(exact_mean_sigma2(1000, HurstParameter(row.h), 0.4)));
  }
  CHECK(rep.gates_passed());
}

TEST_CASE("unnormalized table: bias factor and warnings") {
  const auto cfg = make(ExperimentKind::table_unnormalized, 0.4, {0.45, 0.55, 0.95}, {1000}, 200);
  const auto rep = run_table_unnormalized(cfg);
  REQUIRE(rep.rows.size() == 3);
  CHECK(rep.warnings.size() == 1);
  const auto& r55 = rep.rows[1];
  CHECK(r55.mean == doctest::Approx(0.6004749).epsilon(0.015));
  const auto& r95 = rep.rows[2];
  CHECK(r95.mean == doctest::Approx(0.4 * (1.0 + std::pow(1000.0, -0.9))).epsilon(0.015));
  for (const auto& row : rep.rows) {
    if (row.h > 0.5) {
      for (const auto& g : row.gates) CHECK_MESSAGE(g.passed, g.name);
    }
  }
}

TEST_CASE("clt: one replication gives the trivial KS distance") {
  const auto rep = run_clt_experiment(make(ExperimentKind::clt, 1.0, {0.6}, {50}, 1));
  const auto& row = rep.rows[0];
  const double x = *row.f_mean;
  CHECK(*row.ks_distance == doctest::Approx(std::max(normal_cdf(x), 1.0 - normal_cdf(x))));
  CHECK(*row.ks_distance >= 0.5);
  CHECK(*row.ks_distance <= 1.0);
}

TEST_CASE("clt: white-noise case") {
  const auto rep = run_clt_experiment(make(ExperimentKind::clt, 1.0, {0.5}, {1000}, 2000, 77));
  const auto& row = rep.rows[0];
  CHECK(*row.ks_distance <= 0.05);
  CHECK(std::abs(*row.f_variance - *row.f_variance_predicted) <= 4.0 * std::sqrt(2.0 / 2000));
  CHECK(*row.ks_distance_exact >= 0.0);
  CHECK(rep.gates_passed());
}

TEST_CASE("clt: KS distance shrinks weakly with N") {
  const auto rep = run_clt_experiment(
      make(ExperimentKind::clt, 1.0, {0.25, 0.55, 0.75, 0.95}, {100, 400, 1600}, 2000, 5));
  for (double h : {0.25, 0.55, 0.75, 0.95}) {
    std::vector<double> ks;
    for (const auto& r : rep.rows) {
      if (r.h == h) ks.push_back(*r.ks_distance);
    }
    REQUIRE(ks.size() == 3);
    int inversions = 0;
    for (std::size_t i = 1; i < ks.size(); ++i) {
      if (ks[i] > ks[i - 1]) {
        ++inversions;
        CHECK(ks[i] - ks[i - 1] <= 0.01);
      }
    }
    CAPTURE(h);
    CHECK(inversions <= 1);
  }
}

TEST_CASE("berry-esseen: curve layout and sup-distance scaling") {
  auto cfg = make(ExperimentKind::berry_esseen, 1.0, {0.5}, {16, 64}, 100'000, 8);
  cfg.x_grid = {-1.0, 0.0, 1.0};
  const auto rep = run_berry_esseen_experiment(cfg);
  REQUIRE(rep.rows.size() == 2);
  for (const auto& row : rep.rows) {
    REQUIRE(row.be_curve.size() == 3);
    CHECK(row.be_curve[2].target == 0.0);
    CHECK(row.be_curve[1].target == doctest::Approx(0.0940317).epsilon(1e-6));
    for (const auto& p : row.be_curve) {
      CHECK(p.scaled_deviation ==
            doctest::Approx(std::sqrt(double(row.n)) * (p.probability - normal_cdf(p.x))));
    }
  }
  const double ratio = *rep.rows[1].ks_distance / *rep.rows[0].ks_distance;
  CHECK(ratio > 0.25);
  CHECK(ratio < 0.9);
}

TEST_CASE("as-convergence: unit threshold is almost never crossed") {
  auto cfg = make(ExperimentKind::as_convergence, 1.0, {0.75}, {256}, 2000, 3);
  cfg.delta = 0.0;
  const auto rep = run_as_convergence_experiment(cfg);
  CHECK(*rep.rows[0].exceedance_fraction < 1e-3);
  CHECK(*rep.rows[0].exceedance_threshold == 1.0);
  CHECK(*rep.rows[0].delta_valid);
  CHECK(report_to_json(run_as_convergence_experiment(cfg)) == report_to_json(rep));
}

TEST_CASE("as-convergence: regime violation is warned and marked, still run") {
  auto cfg = make(ExperimentKind::as_convergence, 0.4, {0.3}, {64, 128}, 50, 3);
  cfg.delta = 0.35;
  const auto rep = run_as_convergence_experiment(cfg);
  CHECK(rep.warnings.size() == 1);
  REQUIRE(rep.rows.size() == 2);
  for (const auto& r : rep.rows) CHECK_FALSE(*r.delta_valid);
  CHECK(rep.rows[1].gates.size() == 2);
  CHECK(rep.rows[0].gates.empty());
}

TEST_CASE("config JSON: aliases, strictness, round trip") {
  const auto j = nlohmann::json::parse(
      R"({"kind":"berry_esseen","sigma2":1,"hurst":0.5,"n":256,"replications":10,"seed":3,"x_grid":[0,1]})");
  const auto cfg = config_from_json(j);
  CHECK(cfg.kind == ExperimentKind::berry_esseen);
  CHECK(cfg.h_list == std::vector<double>{0.5});
  CHECK(cfg.n_list == std::vector<std::size_t>{256});
  CHECK(cfg.master_seed == 3);

  const auto back = config_from_json(nlohmann::json::parse(config_to_json(cfg).dump()));
  CHECK(config_to_json(back).dump() == config_to_json(cfg).dump());

  auto extra = j;
  extra["bogus"] = 1;
  CHECK(code_of([&] { config_from_json(extra); }) == ErrorCode::config);
  auto missing = j;
  missing.erase("sigma2");
  CHECK(code_of([&] { config_from_json(missing); }) == ErrorCode::config);
  auto wrong_type = j;
  wrong_type["replications"] = "ten";
  CHECK(code_of([&] { config_from_json(wrong_type); }) == ErrorCode::config);
}

TEST_CASE("number formatting") {
  CHECK(format_double(0.1) == "1.0000000000000001e-01");
  CHECK(format_double(-2.5) == "-2.5000000000000000e+00");
  CHECK(format_double(0.0) == "0.0000000000000000e+00");
  CHECK(format_double(std::nan("")) == "nan");
  CHECK(format_double(-INFINITY) == "-inf");
  for (double v : {0.1, 1.0 / 3.0, 6.02214076e23, 1e-300, 0.0003127}) {
    CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
  }
}

TEST_CASE("CSV layouts") {
  auto t = make(ExperimentKind::table, 0.4, {0.5}, {32}, 5);
  const auto tcsv = report_to_csv(run_experiment(t));
  CHECK(tcsv.rfind("H,MEAN,VAR,MSE\n5.0000000000000000e-01,", 0) == 0);

  auto b = make(ExperimentKind::berry_esseen, 0.4, {0.5}, {32}, 5);
  b.x_grid = {0.0, 1.0};
  const auto bcsv = report_to_csv(run_experiment(b));
  CHECK(bcsv.rfind("x,N,scaled_deviation,target\n0.0000000000000000e+00,32,", 0) == 0);
  CHECK(std::count(bcsv.begin(), bcsv.end(), '\n') == 3);

  auto c = make(ExperimentKind::clt, 0.4, {0.5, 0.7}, {32}, 5);
  const auto ccsv = report_to_csv(run_experiment(c));
  CHECK(ccsv.rfind("H,N,KS,KS_EXACT,F_MEAN,F_VAR,F_VAR_PREDICTED\n", 0) == 0);

  auto a = make(ExperimentKind::as_convergence, 0.4, {0.7}, {32, 64}, 5);
  a.delta = 0.2;
  const auto acsv = report_to_csv(run_experiment(a));
  CHECK(acsv.rfind("H,N,delta,threshold,exceedance_fraction,delta_valid\n", 0) == 0);
  CHECK(acsv.find(",true\n") != std::string::npos);
}

TEST_CASE("moment report JSON") {
  const auto lo = moment_report_to_json(exact_var_sigma2(100, HurstParameter(0.25), 1.0));
  CHECK(lo["c_series"].is_number());
  const auto hi = moment_report_to_json(exact_var_sigma2(1000, HurstParameter(0.75), 0.4));
  CHECK(hi["c_series"].is_null());
  CHECK(hi["c_asymptotic"].get<double>() == doctest::Approx(0.32));
  CHECK(be_curve_to_csv(std::vector<double>{1.0}) ==
        "x,be_limit_curve\n1.0000000000000000e+00,0.0000000000000000e+00\n");
}
