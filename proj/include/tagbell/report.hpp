// JSON views of analysis results, models and simulator configs.
#pragma once

#include <json.hpp>

#include "tagbell/estimator.hpp"
#include "tagbell/simulate.hpp"
#include "tagbell/verify.hpp"

namespace tagbell {

nlohmann::json to_json(const AnalysisConfig& config);
nlohmann::json to_json(const CoincidenceCounts& counts);
// {J, sigma, z, counts, config}; sigma and z are null when sigma is absent.
nlohmann::json to_json(const CoincidenceCounts& counts, double j, const std::optional<JStatistic>& stat);
nlohmann::json to_json(const LhvModel& model);
nlohmann::json to_json(const WorstCase& worst);
nlohmann::json to_json(const SpdcConfig& config);

LhvModel lhv_model_from_json(const nlohmann::json& j);
// Missing fields keep their defaults. Angles are in radians (alpha1_rad, ...).
SpdcConfig spdc_config_from_json(const nlohmann::json& j);

}  // namespace tagbell
