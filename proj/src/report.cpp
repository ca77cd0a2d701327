#include "tagbell/report.hpp"

#include <cmath>

namespace tagbell {

using nlohmann::json;

namespace {

json table_json(const CountTable& t) {
  return json::array({json::array({t[0][0], t[0][1]}), json::array({t[1][0], t[1][1]})});
}

json exposure_json(const Exposure& e) {
  return json::array({json::array({e[0][0], e[0][1]}), json::array({e[1][0], e[1][1]})});
}

json optional_time(const std::optional<TimePs>& t) { return t ? json(*t) : json(nullptr); }

std::optional<TimePs> time_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<TimePs>();
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

json to_json(const AnalysisConfig& c) {
  json j{{"method", method_name(c.method)}};
  switch (c.method) {
    case Method::moving_window:
      j["tau_ps"] = c.tau_ps;
      break;
    case Method::fixed_slots:
      j["tau_ps"] = c.tau_ps;
      j["slot_offset_ps"] = c.slot_offset_ps;
      break;
    case Method::window_sum:
      j["tau1_ps"] = c.tau1_ps;
      j["tau2_ps"] = c.tau2_ps;
      j["tau3_ps"] = c.tau3_ps;
      j["tau22_ps"] = c.max_window();
      break;
  }
  return j;
}

json to_json(const CoincidenceCounts& c) {
  return json{{"coincidences", table_json(c.coincidences)},
              {"singles_a", table_json(c.singles_a)},
              {"singles_b", table_json(c.singles_b)},
              {"exposure_ps", exposure_json(c.exposure)},
              {"method", method_name(c.config.method)},
              {"config", to_json(c.config)}};
}

json to_json(const CoincidenceCounts& counts, double j_value, const std::optional<JStatistic>& stat) {
  json j{{"J", j_value}, {"counts", to_json(counts)}, {"config", to_json(counts.config)}};
  if (stat) {
    j["sigma"] = finite_or_null(stat->sigma);
    j["z"] = finite_or_null(stat->z());
    j["n_subsets"] = stat->n_subsets;
    j["subset_J"] = stat->subset_j;
  } else {
    j["sigma"] = nullptr;
    j["z"] = nullptr;
  }
  return j;
}

json to_json(const LhvModel& model) {
  json lambdas = json::array();
  for (const auto& h : model.lambdas) {
    lambdas.push_back({{"weight", h.weight},
                       {"outcome_a", {h.outcome_a[0], h.outcome_a[1]}},
                       {"outcome_b", {h.outcome_b[0], h.outcome_b[1]}},
                       {"time_a_ps", {optional_time(h.time_a[0]), optional_time(h.time_a[1])}},
                       {"time_b_ps", {optional_time(h.time_b[0]), optional_time(h.time_b[1])}}});
  }
  return json{{"name", model.name}, {"lambdas", lambdas}};
}

json to_json(const WorstCase& w) {
  return json{{"method", method_name(w.method)},
              {"n_models", w.n_models},
              {"min_margin", w.min_margin.value()},
              {"min_margin_exact", {{"num", w.min_margin.num}, {"den", w.min_margin.den}}},
              {"argmin_config", to_json(w.argmin_config)},
              {"argmin_model_dump", to_json(w.argmin_model)}};
}

json to_json(const SpdcConfig& c) {
  return json{{"pair_rate_hz", c.pair_rate_hz},
              {"eta_a", c.eta_a},
              {"eta_b", c.eta_b},
              {"jitter_sigma_ps", c.jitter_sigma_ps},
              {"jitter_model", c.jitter == JitterModel::gaussian ? "gaussian" : "two_sided_exponential"},
              {"dark_rate_a_hz", c.dark_rate_a_hz},
              {"dark_rate_b_hz", c.dark_rate_b_hz},
              {"state_r", c.state_r},
              {"alpha1_rad", c.angles.alpha1},
              {"alpha2_rad", c.angles.alpha2},
              {"beta1_rad", c.angles.beta1},
              {"beta2_rad", c.angles.beta2},
              {"setting_block_ps", c.setting_block_ps},
              {"duration_ps", c.duration_ps},
              {"seed", c.seed}};
}

LhvModel lhv_model_from_json(const json& j) {
  LhvModel m;
  m.name = j.value("name", std::string("custom"));
  for (const auto& l : j.at("lambdas")) {
    HiddenValue h;
    h.weight = l.at("weight").get<std::uint64_t>();
    for (std::size_t s = 0; s < 2; ++s) {
      h.outcome_a[s] = l.at("outcome_a").at(s).get<bool>();
      h.outcome_b[s] = l.at("outcome_b").at(s).get<bool>();
      h.time_a[s] = time_from(l.at("time_a_ps").at(s));
      h.time_b[s] = time_from(l.at("time_b_ps").at(s));
    }
    m.lambdas.push_back(h);
  }
  m.validate();
  return m;
}

SpdcConfig spdc_config_from_json(const json& j) {
  SpdcConfig c;
  c.pair_rate_hz = j.value("pair_rate_hz", c.pair_rate_hz);
  c.eta_a = j.value("eta_a", c.eta_a);
  c.eta_b = j.value("eta_b", c.eta_b);
  c.jitter_sigma_ps = j.value("jitter_sigma_ps", c.jitter_sigma_ps);
  const auto jitter = j.value("jitter_model", std::string("gaussian"));
  if (jitter == "gaussian")
    c.jitter = JitterModel::gaussian;
  else if (jitter == "two_sided_exponential")
    c.jitter = JitterModel::two_sided_exponential;
  else
    throw ValidationError("unknown jitter_model '" + jitter + "'");
  c.dark_rate_a_hz = j.value("dark_rate_a_hz", c.dark_rate_a_hz);
  c.dark_rate_b_hz = j.value("dark_rate_b_hz", c.dark_rate_b_hz);
  c.state_r = j.value("state_r", c.state_r);
  c.angles.alpha1 = j.value("alpha1_rad", c.angles.alpha1);
  c.angles.alpha2 = j.value("alpha2_rad", c.angles.alpha2);
  c.angles.beta1 = j.value("beta1_rad", c.angles.beta1);
  c.angles.beta2 = j.value("beta2_rad", c.angles.beta2);
  c.setting_block_ps = j.value("setting_block_ps", c.setting_block_ps);
  c.duration_ps = j.value("duration_ps", c.duration_ps);
  c.seed = j.value("seed", c.seed);
  c.validate();
  return c;
}

}  // namespace tagbell
