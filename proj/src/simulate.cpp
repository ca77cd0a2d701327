#include "tagbell/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace tagbell {

namespace {

constexpr double kPsPerSecond = 1e12;

void append_interval(std::vector<SettingInterval>& side, TimePs start, TimePs end, Setting s) {
  if (!side.empty() && side.back().setting == s && side.back().end_ps == start)
    side.back().end_ps = end;
  else
    side.push_back({start, end, s});
}

// Exponential inter-arrival process on [0, duration).
template <typename Rng, typename F>
void poisson_times(Rng& rng, double rate_hz, TimePs duration, F&& emit) {
  if (rate_hz <= 0.0 || duration <= 0) return;
  std::exponential_distribution<double> gap(rate_hz / kPsPerSecond);
  double t = 0.0;
  while (true) {
    t += gap(rng);
    if (t >= static_cast<double>(duration)) return;
    emit(t);
  }
}

void sort_events(std::vector<DetectionEvent>& ev) {
  std::stable_sort(ev.begin(), ev.end(),
                   [](const DetectionEvent& x, const DetectionEvent& y) { return x.time_ps < y.time_ps; });
}

}  // namespace

JointProbabilities born_probabilities(double r, double alpha, double beta) {
  const double norm = 1.0 + r * r;
  const double ca = std::cos(alpha), sa = std::sin(alpha);
  const double cb = std::cos(beta), sb = std::sin(beta);
  const double amp = ca * sb + r * sa * cb;
  return {(ca * ca + r * r * sa * sa) / norm, (sb * sb + r * r * cb * cb) / norm, amp * amp / norm};
}

ProbabilityTable quantum_probabilities(double state_r, const Angles& angles) {
  const std::array<double, 2> alpha{angles.alpha1, angles.alpha2};
  const std::array<double, 2> beta{angles.beta1, angles.beta2};
  ProbabilityTable t{};
  for (std::size_t j = 0; j < 2; ++j)
    for (std::size_t k = 0; k < 2; ++k) t[j][k] = born_probabilities(state_r, alpha[j], beta[k]);
  return t;
}

void SpdcConfig::validate() const {
  auto in_unit = [](double x) { return x >= 0.0 && x <= 1.0; };
  if (!(pair_rate_hz >= 0.0)) throw ValidationError("pair_rate_hz must be non-negative");
  if (!in_unit(eta_a) || !in_unit(eta_b)) throw ValidationError("efficiencies must lie in [0, 1]");
  if (!(jitter_sigma_ps >= 0.0)) throw ValidationError("jitter_sigma_ps must be non-negative");
  if (!(dark_rate_a_hz >= 0.0) || !(dark_rate_b_hz >= 0.0)) throw ValidationError("dark rates must be non-negative");
  if (!in_unit(state_r)) throw ValidationError("state_r must lie in [0, 1]");
  if (duration_ps < 0) throw ValidationError("duration_ps must be non-negative");
  if (setting_block_ps <= 0) throw ValidationError("setting_block_ps must be positive");
}

SettingSchedule balanced_block_schedule(TimePs duration_ps, TimePs block_ps, std::uint64_t seed) {
  if (block_ps <= 0) throw ValidationError("block length must be positive");
  std::mt19937_64 rng(seed);
  SettingSchedule s;
  std::array<int, 4> order{0, 1, 2, 3};
  std::size_t n = 0;
  for (TimePs start = 0; start < duration_ps; start += block_ps, ++n) {
    if (n % 4 == 0) std::shuffle(order.begin(), order.end(), rng);
    const int combo = order[n % 4];
    const TimePs end = std::min(duration_ps, start + block_ps);
    append_interval(s.a, start, end, setting_from_index(static_cast<std::size_t>(combo / 2)));
    append_interval(s.b, start, end, setting_from_index(static_cast<std::size_t>(combo % 2)));
  }
  return s;
}

Run simulate_spdc(const SpdcConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  SettingSchedule schedule = balanced_block_schedule(config.duration_ps, config.setting_block_ps, rng());
  const ProbabilityTable probs = quantum_probabilities(config.state_r, config.angles);
  const TimePs duration = config.duration_ps;

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::exponential_distribution<double> expo(1.0);
  const double laplace_scale = config.jitter_sigma_ps / std::sqrt(2.0);
  auto jitter = [&]() -> double {
    if (config.jitter_sigma_ps <= 0.0) return 0.0;
    if (config.jitter == JitterModel::gaussian) return config.jitter_sigma_ps * gauss(rng);
    const double mag = laplace_scale * expo(rng);
    return unit(rng) < 0.5 ? -mag : mag;
  };

  std::vector<DetectionEvent> a;
  std::vector<DetectionEvent> b;
  auto emit = [&](std::vector<DetectionEvent>& out, Site site, double t) {
    const TimePs tag = std::max<TimePs>(0, std::llround(t));
    if (tag >= duration) return;
    if (auto s = schedule.setting_at(site, tag)) out.push_back({tag, site, *s});
  };

  poisson_times(rng, config.pair_rate_hz, duration, [&](double t) {
    const TimePs at = static_cast<TimePs>(t);
    const auto sa = schedule.setting_at(Site::A, at);
    const auto sb = schedule.setting_at(Site::B, at);
    if (!sa || !sb) return;
    const auto& p = probs[index_of(*sa)][index_of(*sb)];
    const double u = unit(rng);
    const bool click_a = u < p.p_a;
    const bool click_b = u < p.p_ab || (u >= p.p_a && u < p.p_a + p.p_b - p.p_ab);
    const bool det_a = click_a && unit(rng) < config.eta_a;
    const bool det_b = click_b && unit(rng) < config.eta_b;
    if (det_a) emit(a, Site::A, t + jitter());
    if (det_b) emit(b, Site::B, t + jitter());
  });
  poisson_times(rng, config.dark_rate_a_hz, duration, [&](double t) { emit(a, Site::A, t); });
  poisson_times(rng, config.dark_rate_b_hz, duration, [&](double t) { emit(b, Site::B, t); });

  sort_events(a);
  sort_events(b);
  return make_run(std::move(a), std::move(b), std::move(schedule), duration, "spdc");
}

SettingSchedule random_trial_schedule(std::size_t n_trials, TimePs spacing_ps, std::size_t trials_per_block,
                                      std::uint64_t seed) {
  if (spacing_ps <= 0 || trials_per_block == 0) throw ValidationError("spacing and block size must be positive");
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  SettingSchedule s;
  for (std::size_t k = 0; k < n_trials; k += trials_per_block) {
    const TimePs start = static_cast<TimePs>(k) * spacing_ps;
    const TimePs end = static_cast<TimePs>(std::min(n_trials, k + trials_per_block)) * spacing_ps;
    const Setting sa = coin(rng) ? Setting::Two : Setting::One;
    const Setting sb = coin(rng) ? Setting::Two : Setting::One;
    append_interval(s.a, start, end, sa);
    append_interval(s.b, start, end, sb);
  }
  return s;
}

Run simulate_lhv(const LhvModel& model, std::size_t n_trials, TimePs spacing_ps, const SettingSchedule& schedule,
                 std::uint64_t seed, TimePs guard_ps) {
  model.validate();
  if (spacing_ps <= 0) throw ValidationError("trial spacing must be positive");
  if (2 * model.max_abs_delay() + guard_ps >= spacing_ps)
    throw ValidationError("overlapping trials: spacing " + std::to_string(spacing_ps) + " ps does not exceed " +
                          "2 * max|T| + guard = " + std::to_string(2 * model.max_abs_delay() + guard_ps) + " ps");
  const TimePs duration = static_cast<TimePs>(n_trials) * spacing_ps;
  if (auto report = validate_schedule(schedule, duration); !report.empty() || schedule.empty())
    throw ValidationError("schedule does not tile the trial range: " +
                          (report.empty() ? std::string("schedule is empty") : report.front().message));

  std::vector<std::uint64_t> cumulative(model.lambdas.size());
  std::uint64_t acc = 0;
  for (std::size_t i = 0; i < model.lambdas.size(); ++i) cumulative[i] = acc += model.lambdas[i].weight;

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint64_t> draw(0, acc - 1);
  std::vector<DetectionEvent> a;
  std::vector<DetectionEvent> b;
  std::size_t ia = 0;
  std::size_t ib = 0;
  for (std::size_t k = 0; k < n_trials; ++k) {
    const auto u = draw(rng);
    const auto& lambda = model.lambdas[static_cast<std::size_t>(
        std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin())];
    const TimePs origin = trial_origin(k, spacing_ps);
    while (schedule.a[ia].end_ps <= origin) ++ia;
    while (schedule.b[ib].end_ps <= origin) ++ib;
    const Setting sa = schedule.a[ia].setting;
    const Setting sb = schedule.b[ib].setting;
    if (auto t = lambda.tag_a(index_of(sa))) a.push_back({origin + *t, Site::A, sa});
    if (auto t = lambda.tag_b(index_of(sb))) b.push_back({origin + *t, Site::B, sb});
  }
  return make_run(std::move(a), std::move(b), schedule, duration, model.name);
}

LhvModel build_exploit_model(TimePs delta_ps, TimePs tau_design_ps) {
  if (tau_design_ps <= 0 || tau_design_ps % 2 != 0)
    throw ValidationError("design window must be positive and even");
  if (delta_ps < 0) throw ValidationError("delta must be non-negative");
  if (delta_ps > 0 && 4 * delta_ps < tau_design_ps)
    throw ValidationError("infeasible exploit: delta " + std::to_string(delta_ps) +
                          " ps too small, 2*delta must reach tau/2 = " + std::to_string(tau_design_ps / 2) + " ps");
  if (2 * delta_ps >= tau_design_ps)
    throw ValidationError("infeasible exploit: delta " + std::to_string(delta_ps) +
                          " ps must stay below tau/2 = " + std::to_string(tau_design_ps / 2) + " ps");

  const std::array<bool, 2> both{true, true};
  const std::array<bool, 2> none{false, false};
  const std::array<std::optional<TimePs>, 2> early{TimePs{0}, -delta_ps};
  const std::array<std::optional<TimePs>, 2> late{TimePs{0}, delta_ps};
  const std::array<std::optional<TimePs>, 2> prompt{TimePs{0}, TimePs{0}};

  LhvModel m;
  m.name = delta_ps == 0 ? "no_delay" : "exploit";
  // Both sides click; the second settings drift apart in opposite directions.
  m.lambdas.push_back({3, both, both, late, early});
  m.lambdas.push_back({3, both, both, early, late});
  // One-sided clicks keep the singles above the coincidences.
  m.lambdas.push_back({1, both, none, prompt, prompt});
  m.lambdas.push_back({1, none, both, prompt, prompt});
  return m;
}

std::vector<LhvModel> shipped_models() {
  std::vector<LhvModel> models{build_exploit_model(), build_exploit_model(0)};

  // Hidden polarization angle in steps of 22.5 degrees. A side clicks when
  // its analyzer is within 22.5 degrees of the hidden angle and answers
  // later the further it is from alignment.
  LhvModel pol;
  pol.name = "polarization_timing";
  constexpr TimePs kStepPs = 20'000;
  const std::array<int, 2> alpha{0, 2};
  const std::array<int, 2> beta{1, 3};
  auto distance = [](int m, int s) {
    const int d = ((m - s) % 8 + 8) % 8;
    return std::min(d, 8 - d);
  };
  for (int m = 0; m < 8; ++m) {
    HiddenValue h;
    h.weight = 1;
    for (std::size_t j = 0; j < 2; ++j) {
      const int da = distance(m, alpha[j]);
      const int db = distance(m, beta[j]);
      h.outcome_a[j] = da <= 1;
      h.outcome_b[j] = db <= 1;
      h.time_a[j] = da * kStepPs;
      h.time_b[j] = db * kStepPs;
    }
    pol.lambdas.push_back(h);
  }
  models.push_back(std::move(pol));
  return models;
}

}  // namespace tagbell
