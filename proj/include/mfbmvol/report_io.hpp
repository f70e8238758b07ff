#pragma once

#include "mfbmvol/analytics.hpp"
#include "mfbmvol/harness.hpp"

#include <json.hpp>

#include <span>
#include <string>

namespace mfbmvol {

/// Config file keys: kind, sigma2, mu, h_list (or hurst), n (or n_list),
/// replications, master_seed (or seed), x_grid, delta. Unknown keys are
/// rejected with ErrorCode::config.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::ordered_json config_to_json(const ExperimentConfig& cfg);

/// Full report. Output is a pure function of the report contents (elapsed
/// time is left out), so reruns with the same seed are byte-identical.
std::string report_to_json(const ExperimentReport& report);

/// Tables: H,MEAN,VAR,MSE. Berry-Esseen: x,N,scaled_deviation,target.
/// CLT: H,N,KS,KS_EXACT,F_MEAN,F_VAR,F_VAR_PREDICTED.
/// Almost-sure: H,N,delta,threshold,exceedance_fraction,delta_valid.
std::string report_to_csv(const ExperimentReport& report);

nlohmann::ordered_json moment_report_to_json(const MomentReport& report);

/// x,be_limit_curve header plus one row per x.
std::string be_curve_to_csv(std::span<const double> xs);

}  // namespace mfbmvol
