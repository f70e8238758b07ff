// mfbmvol command-line front end. Talks to the library only through the C API.

#include <mfbmvol/mfbmvol.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

enum Exit : int { kOk = 0, kUsage = 1, kRuntime = 2, kGateFailure = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LibraryError : std::runtime_error {
  mfbmvol_status status;
  LibraryError(mfbmvol_status s, const std::string& what) : std::runtime_error(what), status(s) {}
};

void check(mfbmvol_status s) {
  if (s != MFBMVOL_OK) {
    throw LibraryError(s, std::string(mfbmvol_status_name(s)) + ": " + mfbmvol_last_error());
  }
}

struct CString {
  char* p = nullptr;
  ~CString() { mfbmvol_string_free(p); }
  std::string str() const { return p ? std::string(p) : std::string(); }
};

struct PathDeleter {
  void operator()(mfbmvol_path* p) const { mfbmvol_path_free(p); }
};
struct ReportDeleter {
  void operator()(mfbmvol_report* r) const { mfbmvol_report_free(r); }
};
using PathHandle = std::unique_ptr<mfbmvol_path, PathDeleter>;
using ReportHandle = std::unique_ptr<mfbmvol_report, ReportDeleter>;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

// Temp file in the target directory, then rename over the destination.
void write_atomic(const fs::path& dest, const std::string& content) {
  fs::path tmp = dest;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
    os.flush();
    if (!os) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw std::runtime_error("write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, dest, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw std::runtime_error("cannot rename onto " + dest.string());
  }
}

std::string read_file(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + p.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

// Output goes to --out when given (summary on stdout), otherwise to stdout
// (summary on stderr).
void emit(const std::string& out, const std::string& content, const std::string& summary) {
  if (out.empty() || out == "-") {
    std::cout << content << std::flush;
    std::cerr << summary << '\n';
  } else {
    write_atomic(out, content);
    std::cout << summary << " -> " << out << '\n';
  }
}

template <typename T>
T need(const std::optional<T>& v, const char* flag) {
  if (!v) throw UsageError(std::string("missing required option ") + flag);
  return *v;
}

struct SimulateArgs {
  std::optional<double> hurst, sigma2, s0;
  std::optional<std::size_t> n;
  std::optional<std::uint64_t> seed;
  std::uint64_t stream = 0;
  double mu = 0.0, alpha = 1.0, beta = 1.0, t_start = 0.0, t_end = 1.0;
  std::string out;
};

int run_simulate(const SimulateArgs& a) {
  mfbmvol_model_params p;
  mfbmvol_model_params_init(&p);
  p.s0 = need(a.s0, "--s0");
  p.sigma2 = need(a.sigma2, "--sigma2");
  p.hurst = need(a.hurst, "--hurst");
  p.mu = a.mu;
  p.alpha = a.alpha;
  p.beta = a.beta;
  mfbmvol_grid g;
  mfbmvol_grid_init(&g, need(a.n, "--n"));
  g.t_start = a.t_start;
  g.t_end = a.t_end;
  const mfbmvol_seed seed{need(a.seed, "--seed"), a.stream};

  mfbmvol_path* raw = nullptr;
  check(mfbmvol_path_simulate(&p, &g, seed, &raw));
  PathHandle path(raw);
  CString csv;
  check(mfbmvol_path_to_csv(path.get(), &csv.p));

  std::string summary = "simulate: n=" + std::to_string(g.n) + " H=" + fmt17(p.hurst);
  if (g.t_start == 0.0 && g.t_end == 1.0) {
    mfbmvol_estimate est;
    check(mfbmvol_estimate_sigma2(path.get(), p.hurst, &est));
    summary += " sigma2_hat=" + fmt17(est.sigma2_hat);
  } else {
    mfbmvol_estimate est;
    check(mfbmvol_estimate_sigma2_sun(path.get(), g.t_start, g.t_end, p.hurst, &est));
    summary += " sigma2_sun=" + fmt17(est.sigma2_hat);
  }
  emit(a.out, csv.str(), summary);
  return kOk;
}

struct EstimateArgs {
  std::string input, out, estimator = "eq2";
  std::optional<double> hurst, t1, t2;
};

int run_estimate(const EstimateArgs& a) {
  const double h = need(a.hurst, "--hurst");
  if (a.input.empty()) throw UsageError("missing required option --input");
  const std::string text = read_file(a.input);
  mfbmvol_path* raw = nullptr;
  check(mfbmvol_path_from_csv(text.c_str(), &raw));
  PathHandle path(raw);

  mfbmvol_estimate est;
  nlohmann::ordered_json j;
  if (a.estimator == "eq2") {
    check(mfbmvol_estimate_sigma2(path.get(), h, &est));
  } else {
    const std::size_t n = mfbmvol_path_intervals(path.get());
    const double t1 = a.t1.value_or(mfbmvol_path_times(path.get())[0]);
    const double t2 = a.t2.value_or(mfbmvol_path_times(path.get())[n]);
    check(mfbmvol_estimate_sigma2_sun(path.get(), t1, t2, h, &est));
    j["t1"] = t1;
    j["t2"] = t2;
  }
  nlohmann::ordered_json out;
  out["estimator"] = a.estimator;
  out["sigma2_hat"] = est.sigma2_hat;
  out["normalizing_factor"] = est.normalizing_factor;
  out["n"] = est.n;
  out["h"] = h;
  out["sum_sq_log_returns"] = est.sum_sq_log_returns;
  for (auto& [k, v] : j.items()) out[k] = v;
  emit(a.out, out.dump(2) + "\n",
       "estimate: " + a.estimator + " n=" + std::to_string(est.n) +
           " sigma2_hat=" + fmt17(est.sigma2_hat));
  return kOk;
}

struct AnalyticsArgs {
  std::optional<double> hurst, sigma2;
  std::optional<std::size_t> n;
  double mu = 0.0;
  std::vector<double> x_grid;
  std::string out, curve_out;
};

int run_analytics(const AnalyticsArgs& a) {
  mfbmvol_moment_report r;
  check(mfbmvol_exact_moments(need(a.n, "--n"), need(a.hurst, "--hurst"),
                              need(a.sigma2, "--sigma2"), a.mu, &r));
  CString js;
  check(mfbmvol_moment_report_to_json(&r, &js.p));
  if (!a.curve_out.empty()) {
    if (a.x_grid.empty()) throw UsageError("--curve-out needs --x-grid");
    CString csv;
    check(mfbmvol_be_curve_to_csv(a.x_grid.data(), a.x_grid.size(), &csv.p));
    write_atomic(a.curve_out, csv.str());
  }
  emit(a.out, js.str(),
       "analytics: n=" + std::to_string(r.n) + " exact_mean=" + fmt17(r.exact_mean) +
           " exact_variance=" + fmt17(r.exact_variance));
  return kOk;
}

struct ExperimentArgs {
  std::string kind;
  std::string config, out, format = "csv";
  std::vector<double> hurst, x_grid;
  std::vector<std::size_t> n;
  std::optional<double> sigma2, mu, delta;
  std::optional<std::size_t> replications;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  bool check = false;
};

// Config file first, flags on top. Required keys are checked here so that a
// missing one is a usage error rather than a library config error.
json merged_config(const ExperimentArgs& a) {
  json cfg = json::object();
  if (!a.config.empty()) {
    try {
      cfg = json::parse(read_file(a.config));
    } catch (const json::parse_error& e) {
      throw UsageError("config file " + a.config + ": " + e.what());
    }
    if (!cfg.is_object()) throw UsageError("config file must hold a JSON object");
  }
  auto rename_key = [&](const char* alias, const char* key) {
    if (cfg.contains(alias)) {
      if (!cfg.contains(key)) cfg[key] = cfg[alias];
      cfg.erase(alias);
    }
  };
  rename_key("hurst", "h_list");
  rename_key("n", "n_list");
  rename_key("seed", "master_seed");
  if (cfg.contains("kind") && cfg["kind"] != a.kind) {
    throw UsageError("config kind '" + cfg["kind"].dump() + "' does not match subcommand");
  }
  cfg["kind"] = a.kind;
  if (!a.hurst.empty()) cfg["h_list"] = a.hurst;
  if (!a.n.empty()) cfg["n_list"] = a.n;
  if (!a.x_grid.empty()) cfg["x_grid"] = a.x_grid;
  if (a.sigma2) cfg["sigma2"] = *a.sigma2;
  if (a.mu) cfg["mu"] = *a.mu;
  if (a.delta) cfg["delta"] = *a.delta;
  if (a.replications) cfg["replications"] = *a.replications;
  if (a.seed) cfg["master_seed"] = *a.seed;

  const std::pair<const char*, const char*> required[] = {{"sigma2", "--sigma2"},
                                                          {"h_list", "--hurst"},
                                                          {"n_list", "--n"},
                                                          {"replications", "--replications"},
                                                          {"master_seed", "--seed"}};
  for (const auto& [key, flag] : required) {
    if (!cfg.contains(key)) throw UsageError(std::string("missing required option ") + flag);
  }
  if (a.kind == "berry_esseen" && !cfg.contains("x_grid")) {
    throw UsageError("missing required option --x-grid");
  }
  if (a.kind == "as_convergence" && !cfg.contains("delta")) {
    throw UsageError("missing required option --delta");
  }
  return cfg;
}

int run_experiment_cmd(const ExperimentArgs& a) {
  const json cfg = merged_config(a);
  mfbmvol_report* raw = nullptr;
  const mfbmvol_status s = mfbmvol_experiment_run(cfg.dump().c_str(), a.threads, &raw);
  if (s == MFBMVOL_E_CONFIG || s == MFBMVOL_E_INVALID_ARGUMENT) {
    throw UsageError(std::string("invalid configuration: ") + mfbmvol_last_error());
  }
  check(s);
  ReportHandle report(raw);

  CString text;
  if (a.format == "json") {
    check(mfbmvol_report_to_json(report.get(), &text.p));
  } else {
    check(mfbmvol_report_to_csv(report.get(), &text.p));
  }
  for (std::size_t i = 0; i < mfbmvol_report_warning_count(report.get()); ++i) {
    std::cerr << "warning: " << mfbmvol_report_warning(report.get(), i) << '\n';
  }
  const bool passed = mfbmvol_report_gates_passed(report.get()) != 0;
  char elapsed[32];
  std::snprintf(elapsed, sizeof elapsed, "%.2f", mfbmvol_report_elapsed_seconds(report.get()));
  emit(a.out, text.str(),
       a.kind + ": rows=" + std::to_string(mfbmvol_report_row_count(report.get())) +
           " gates=" + (passed ? "pass" : "FAIL") + " elapsed=" + elapsed + "s");
  return a.check && !passed ? kGateFailure : kOk;
}

void add_experiment(CLI::App& app, const char* name, const char* kind, const char* help,
                    ExperimentArgs& a, int& which, int id) {
  auto* sub = app.add_subcommand(name, help);
  a.kind = kind;
  sub->add_option("--config", a.config, "JSON experiment config; flags override it")
      ->check(CLI::ExistingFile);
  sub->add_option("--hurst", a.hurst, "Hurst values, comma separated")->delimiter(',');
  sub->add_option("--n", a.n, "Grid sizes, comma separated")->delimiter(',');
  sub->add_option("--sigma2", a.sigma2, "True volatility parameter sigma^2");
  sub->add_option("--mu", a.mu, "Drift (default 0)");
  sub->add_option("--replications", a.replications, "Monte Carlo replications per cell");
  sub->add_option("--seed", a.seed, "Master seed");
  sub->add_option("--delta", a.delta, "Exceedance exponent (as-convergence)");
  sub->add_option("--x-grid", a.x_grid, "Evaluation points (berry-esseen)")->delimiter(',');
  sub->add_option("--threads", a.threads, "Worker threads (0: MFBMVOL_THREADS or all cores)");
  sub->add_option("--out", a.out, "Output file (default stdout)");
  sub->add_option("--format", a.format, "Output format (default csv)")
      ->check(CLI::IsMember({"csv", "json"}));
  sub->add_flag("--check", a.check, "Exit 3 if any statistical gate fails");
  sub->callback([&which, id] { which = id; });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixed fractional Brownian motion volatility toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(mfbmvol_version()));
  int which = -1;

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Simulate one price path to CSV");
  s->add_option("--hurst", sim.hurst, "Hurst parameter");
  s->add_option("--sigma2", sim.sigma2, "Volatility parameter sigma^2");
  s->add_option("--n", sim.n, "Number of intervals");
  s->add_option("--s0", sim.s0, "Initial price");
  s->add_option("--seed", sim.seed, "Master seed");
  s->add_option("--stream", sim.stream, "Stream index (default 0)");
  s->add_option("--mu", sim.mu, "Drift (default 0)");
  s->add_option("--alpha", sim.alpha, "Brownian weight (default 1)");
  s->add_option("--beta", sim.beta, "Fractional weight (default 1)");
  s->add_option("--t-start", sim.t_start, "Grid start (default 0)");
  s->add_option("--t-end", sim.t_end, "Grid end (default 1)");
  s->add_option("--out", sim.out, "Output CSV (default stdout)");
  s->callback([&] { which = 0; });

  EstimateArgs est;
  auto* e = app.add_subcommand("estimate", "Estimate sigma^2 from a (t, S) CSV");
  e->add_option("--input", est.input, "Path CSV")->check(CLI::ExistingFile);
  e->add_option("--hurst", est.hurst, "Hurst parameter");
  e->add_option("--estimator", est.estimator, "eq2 (normalized, default) or sun")
      ->check(CLI::IsMember({"eq2", "sun"}));
  e->add_option("--t1", est.t1, "Sun interval start (default first time)");
  e->add_option("--t2", est.t2, "Sun interval end (default last time)");
  e->add_option("--out", est.out, "Output JSON (default stdout)");
  e->callback([&] { which = 1; });

  AnalyticsArgs an;
  auto* a = app.add_subcommand("analytics", "Exact moments and the Berry-Esseen limit curve");
  a->add_option("--n", an.n, "Number of intervals");
  a->add_option("--hurst", an.hurst, "Hurst parameter");
  a->add_option("--sigma2", an.sigma2, "Volatility parameter sigma^2");
  a->add_option("--mu", an.mu, "Drift (default 0)");
  a->add_option("--x-grid", an.x_grid, "Points for the limit curve")->delimiter(',');
  a->add_option("--curve-out", an.curve_out, "CSV file for the limit curve");
  a->add_option("--out", an.out, "Output JSON (default stdout)");
  a->callback([&] { which = 2; });

  ExperimentArgs ex[5];
  add_experiment(app, "table", "table", "Mean/variance/MSE table", ex[0], which, 10);
  add_experiment(app, "table-unnormalized", "table_unnormalized",
                 "Table for the raw sum of squared log-returns", ex[1], which, 11);
  add_experiment(app, "clt", "clt", "KS distance of the standardized statistic", ex[2], which,
                 12);
  add_experiment(app, "berry-esseen", "berry_esseen", "Scaled CDF deviations", ex[3], which, 13);
  add_experiment(app, "as-convergence", "as_convergence", "Exceedance fractions", ex[4], which,
                 14);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& ok) {
    return app.exit(ok);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return kUsage;
  }

  try {
    switch (which) {
      case 0: return run_simulate(sim);
      case 1: return run_estimate(est);
      case 2: return run_analytics(an);
      default: return run_experiment_cmd(ex[which - 10]);
    }
  } catch (const UsageError& err) {
    std::cerr << "usage error: " << err.what() << '\n';
    return kUsage;
  } catch (const LibraryError& err) {
    const bool bad_input =
        err.status == MFBMVOL_E_INVALID_ARGUMENT || err.status == MFBMVOL_E_CONFIG;
    std::cerr << (bad_input ? "usage error: " : "error: ") << err.what() << '\n';
    return bad_input ? kUsage : kRuntime;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kRuntime;
  }
}
