#include "mfbmvol/report_io.hpp"

#include "mfbmvol/errors.hpp"
#include "mfbmvol/format.hpp"

#include <set>
#include <sstream>

namespace mfbmvol {

namespace {

using ojson = nlohmann::ordered_json;

template <typename T>
T get_as(const nlohmann::json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::config, std::string("config key '") + key + "': " + e.what());
  }
}

// Accepts a scalar or an array.
template <typename T>
std::vector<T> get_list(const nlohmann::json& j, const char* key) {
  const auto& v = j.at(key);
  if (v.is_array()) return get_as<std::vector<T>>(j, key);
  return {get_as<T>(j, key)};
}

template <typename T>
void put_optional(ojson& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

ojson gate_json(const GateResult& g) {
  ojson j;
  j["name"] = g.name;
  j["value"] = g.value;
  j["lower"] = g.lower;
  j["upper"] = g.upper;
  j["passed"] = g.passed;
  return j;
}

ojson row_json(const ExperimentRow& r) {
  ojson j;
  j["h"] = r.h;
  j["n"] = r.n;
  j["target"] = r.target;
  j["mean"] = r.mean;
  j["variance"] = r.variance;
  j["mse"] = r.mse;
  j["exact_mean"] = r.exact_mean;
  j["exact_variance"] = r.exact_variance;
  put_optional(j, "ks_distance", r.ks_distance);
  put_optional(j, "ks_distance_exact", r.ks_distance_exact);
  put_optional(j, "f_mean", r.f_mean);
  put_optional(j, "f_variance", r.f_variance);
  put_optional(j, "f_variance_predicted", r.f_variance_predicted);
  put_optional(j, "scaled_sup_distance", r.scaled_sup_distance);
  if (!r.be_curve.empty()) {
    ojson curve = ojson::array();
    for (const auto& p : r.be_curve) {
      curve.push_back(ojson{{"x", p.x},
                            {"probability", p.probability},
                            {"scaled_deviation", p.scaled_deviation},
                            {"target", p.target}});
    }
    j["be_curve"] = std::move(curve);
  }
  put_optional(j, "exceedance_fraction", r.exceedance_fraction);
  put_optional(j, "exceedance_threshold", r.exceedance_threshold);
  put_optional(j, "delta_valid", r.delta_valid);
  ojson gates = ojson::array();
  for (const auto& g : r.gates) gates.push_back(gate_json(g));
  j["gates"] = std::move(gates);
  return j;
}

}  // namespace

ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) fail(ErrorCode::config, "experiment config must be a JSON object");
  static const std::set<std::string> known{"kind", "sigma2", "mu", "h_list", "hurst",
                                           "n", "n_list", "replications", "master_seed",
                                           "seed", "x_grid", "delta"};
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) fail(ErrorCode::config, "unknown config key '" + key + "'");
  }
  auto require_key = [&](std::initializer_list<const char*> keys) -> const char* {
    for (const char* k : keys) {
      if (j.contains(k)) return k;
    }
    fail(ErrorCode::config, std::string("missing required config key '") + *keys.begin() + "'");
  };

  ExperimentConfig cfg;
  cfg.kind = parse_experiment_kind(get_as<std::string>(j, require_key({"kind"})));
  cfg.sigma2 = get_as<double>(j, require_key({"sigma2"}));
  if (j.contains("mu")) cfg.mu = get_as<double>(j, "mu");
  cfg.h_list = get_list<double>(j, require_key({"h_list", "hurst"}));
  cfg.n_list = get_list<std::size_t>(j, require_key({"n_list", "n"}));
  cfg.replications = get_as<std::size_t>(j, require_key({"replications"}));
  cfg.master_seed = get_as<std::uint64_t>(j, require_key({"master_seed", "seed"}));
  if (j.contains("x_grid")) cfg.x_grid = get_list<double>(j, "x_grid");
  if (j.contains("delta")) cfg.delta = get_as<double>(j, "delta");
  cfg.validate();
  return cfg;
}

nlohmann::ordered_json config_to_json(const ExperimentConfig& cfg) {
  ojson j;
  j["kind"] = std::string(to_string(cfg.kind));
  j["sigma2"] = cfg.sigma2;
  j["mu"] = cfg.mu;
  j["h_list"] = cfg.h_list;
  j["n_list"] = cfg.n_list;
  j["replications"] = cfg.replications;
  j["master_seed"] = cfg.master_seed;
  if (!cfg.x_grid.empty()) j["x_grid"] = cfg.x_grid;
  put_optional(j, "delta", cfg.delta);
  return j;
}

std::string report_to_json(const ExperimentReport& report) {
  ojson j;
  j["config"] = config_to_json(report.config);
  ojson rows = ojson::array();
  for (const auto& r : report.rows) rows.push_back(row_json(r));
  j["rows"] = std::move(rows);
  j["warnings"] = report.warnings;
  j["gates_passed"] = report.gates_passed();
  return j.dump(2) + "\n";
}

std::string report_to_csv(const ExperimentReport& report) {
  std::ostringstream os;
  const auto f = [](double v) { return format_double(v); };
  switch (report.config.kind) {
    case ExperimentKind::table:
    case ExperimentKind::table_unnormalized:
      os << "H,MEAN,VAR,MSE\n";
      for (const auto& r : report.rows) {
        os << f(r.h) << ',' << f(r.mean) << ',' << f(r.variance) << ',' << f(r.mse) << '\n';
      }
      break;
    case ExperimentKind::berry_esseen:
      os << "x,N,scaled_deviation,target\n";
      for (const auto& r : report.rows) {
        for (const auto& p : r.be_curve) {
          os << f(p.x) << ',' << r.n << ',' << f(p.scaled_deviation) << ',' << f(p.target) << '\n';
        }
      }
      break;
    case ExperimentKind::clt:
      os << "H,N,KS,KS_EXACT,F_MEAN,F_VAR,F_VAR_PREDICTED\n";
      for (const auto& r : report.rows) {
        os << f(r.h) << ',' << r.n << ',' << f(*r.ks_distance) << ',' << f(*r.ks_distance_exact)
           << ',' << f(*r.f_mean) << ',' << f(*r.f_variance) << ','
           << f(*r.f_variance_predicted) << '\n';
      }
      break;
    case ExperimentKind::as_convergence:
      os << "H,N,delta,threshold,exceedance_fraction,delta_valid\n";
      for (const auto& r : report.rows) {
        os << f(r.h) << ',' << r.n << ',' << f(*report.config.delta) << ','
           << f(*r.exceedance_threshold) << ',' << f(*r.exceedance_fraction) << ','
           << (*r.delta_valid ? "true" : "false") << '\n';
      }
      break;
  }
  return os.str();
}

nlohmann::ordered_json moment_report_to_json(const MomentReport& r) {
  ojson j;
  j["n"] = r.n;
  j["h"] = r.h;
  j["sigma2"] = r.sigma2;
  j["mu"] = r.mu;
  j["exact_mean"] = r.exact_mean;
  j["exact_variance"] = r.exact_variance;
  j["u1_term"] = r.u1_term;
  j["t1_term"] = r.t1_term;
  j["var_u2_scaled"] = r.var_u2_scaled;
  j["var_s3_scaled"] = r.var_s3_scaled;
  j["c_asymptotic"] = r.c_asymptotic;
  if (r.c_series) {
    j["c_series"] = *r.c_series;
  } else {
    j["c_series"] = nullptr;
  }
  return j;
}

std::string be_curve_to_csv(std::span<const double> xs) {
  std::ostringstream os;
  os << "x,be_limit_curve\n";
  for (double x : xs) os << format_double(x) << ',' << format_double(be_limit_curve(x)) << '\n';
  return os.str();
}

}  // namespace mfbmvol
