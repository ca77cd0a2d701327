#include "tagbell/verify.hpp"

#include <algorithm>
#include <cstdlib>
#include <random>
#include <thread>

namespace tagbell {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t sub_seed(std::uint64_t seed, std::size_t index, std::uint64_t stream) {
  return splitmix64(splitmix64(seed ^ stream) + static_cast<std::uint64_t>(index));
}

constexpr std::uint64_t kModelStream = 0x6d6f64656cULL;
constexpr std::uint64_t kConfigStream = 0x636f6e666967ULL;

Theorem theorem_for(Method m) {
  switch (m) {
    case Method::moving_window: return Theorem::ch;
    case Method::fixed_slots: return Theorem::slots;
    case Method::window_sum: return Theorem::window_sum;
  }
  return Theorem::ch;
}

struct Best {
  Rational margin;
  std::size_t index = 0;
  bool set = false;

  void offer(const Rational& m, std::size_t i) {
    if (!set || m < margin || (m == margin && i < index)) {
      margin = m;
      index = i;
      set = true;
    }
  }
};

constexpr std::array<Method, 3> kMethods{Method::moving_window, Method::fixed_slots, Method::window_sum};

}  // namespace

Rational ExactTable::margin() const {
  const std::int64_t num = singles_a[0] + singles_b[0] - joint[0][0] - joint[0][1] - joint[1][0] + joint[1][1];
  return {num, denominator};
}

bool in_coincidence_set(const HiddenValue& h, std::size_t j, std::size_t k, const AnalysisConfig& config,
                        TimePs origin_ps) {
  if (!h.time_a[j] || !h.time_b[k]) return false;
  const TimePs ta = *h.time_a[j];
  const TimePs tb = *h.time_b[k];
  if (config.method == Method::fixed_slots)
    return slot_index(origin_ps + ta, config.tau_ps, config.slot_offset_ps) ==
           slot_index(origin_ps + tb, config.tau_ps, config.slot_offset_ps);
  const TimePs window = config.window_for(setting_from_index(j), setting_from_index(k));
  return 2 * std::abs(ta - tb) < window;
}

ExactTable exact_counts(const LhvModel& model, const AnalysisConfig& config, TimePs origin_ps) {
  model.validate();
  config.validate();
  ExactTable t;
  t.config = config;
  t.denominator = static_cast<std::int64_t>(model.total_weight());
  for (const auto& h : model.lambdas) {
    const auto w = static_cast<std::int64_t>(h.weight);
    for (std::size_t j = 0; j < 2; ++j) {
      if (h.tag_a(j)) t.singles_a[j] += w;
      if (h.tag_b(j)) t.singles_b[j] += w;
      for (std::size_t k = 0; k < 2; ++k)
        if (h.tag_a(j) && h.tag_b(k) && in_coincidence_set(h, j, k, config, origin_ps)) t.joint[j][k] += w;
    }
  }
  return t;
}

Rational check_theorem(const LhvModel& model, const AnalysisConfig& config, Theorem which, TimePs origin_ps) {
  if (theorem_for(config.method) != which)
    throw ValidationError("method " + std::string(method_name(config.method)) +
                          " does not match the requested inequality");
  return exact_counts(model, config, origin_ps).margin();
}

LhvModel random_model(const SearchBounds& bounds, std::uint64_t seed, std::size_t index) {
  std::mt19937_64 rng(sub_seed(seed, index, kModelStream));
  std::uniform_int_distribution<std::size_t> size(1, std::max<std::size_t>(1, bounds.max_lambdas));
  std::uniform_int_distribution<std::uint64_t> weight(1, std::max<std::uint64_t>(1, bounds.max_weight));
  std::uniform_int_distribution<int> delay(-bounds.delay_grid, bounds.delay_grid);
  std::bernoulli_distribution bit(0.5);
  LhvModel m;
  m.name = "random#" + std::to_string(index);
  m.lambdas.resize(size(rng));
  for (auto& h : m.lambdas) {
    h.weight = weight(rng);
    for (std::size_t j = 0; j < 2; ++j) {
      h.outcome_a[j] = bit(rng);
      h.outcome_b[j] = bit(rng);
      h.time_a[j] = delay(rng) * bounds.delay_step_ps;
      h.time_b[j] = delay(rng) * bounds.delay_step_ps;
    }
  }
  return m;
}

AnalysisConfig random_config(Method method, const SearchBounds& bounds, std::uint64_t seed, std::size_t index) {
  std::mt19937_64 rng(sub_seed(seed, index, kConfigStream + static_cast<std::uint64_t>(method)));
  // Windows span up to twice the delay range so every regime gets visited.
  const TimePs unit = 2 * std::max<TimePs>(1, bounds.delay_step_ps);
  std::uniform_int_distribution<TimePs> multiple(1, 2 * std::max(1, bounds.delay_grid));
  switch (method) {
    case Method::moving_window:
      return AnalysisConfig::moving(unit * multiple(rng));
    case Method::fixed_slots: {
      const TimePs tau = unit * multiple(rng);
      std::uniform_int_distribution<TimePs> offset(0, tau - 1);
      return AnalysisConfig::slots(tau, offset(rng));
    }
    case Method::window_sum: {
      const TimePs t1 = unit * multiple(rng);
      const TimePs t2 = unit * multiple(rng);
      const TimePs t3 = unit * multiple(rng);
      return AnalysisConfig::window_sum(t1, t2, t3);
    }
  }
  return {};
}

std::vector<WorstCase> random_model_search(std::size_t n_models, const SearchBounds& bounds, std::uint64_t seed) {
  if (n_models == 0) return {};
  if (bounds.max_lambdas == 0 || bounds.max_lambdas > 64)
    throw ValidationError("max_lambdas must lie in [1, 64] for exact enumeration");

  const std::size_t workers =
      std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, std::max<std::size_t>(1, n_models / 1000 + 1));
  std::vector<std::array<Best, 3>> partial(workers);
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < n_models; i += workers) {
          const LhvModel model = random_model(bounds, seed, i);
          for (std::size_t m = 0; m < kMethods.size(); ++m) {
            const auto config = random_config(kMethods[m], bounds, seed, i);
            partial[w][m].offer(exact_counts(model, config).margin(), i);
          }
        }
      });
    }
  }

  std::vector<WorstCase> out;
  for (std::size_t m = 0; m < kMethods.size(); ++m) {
    Best best;
    for (const auto& p : partial)
      if (p[m].set) best.offer(p[m].margin, p[m].index);
    WorstCase wc;
    wc.method = kMethods[m];
    wc.n_models = n_models;
    wc.min_margin = best.margin;
    wc.argmin_model = random_model(bounds, seed, best.index);
    wc.argmin_config = random_config(kMethods[m], bounds, seed, best.index);
    out.push_back(std::move(wc));
  }
  return out;
}

bool subset_implication_holds(TimePs d11, TimePs d12, TimePs d21, TimePs d22, TimePs tau1, TimePs tau2,
                              TimePs tau3) {
  const bool small = 2 * std::abs(d11) < tau1 && 2 * std::abs(d12) < tau2 && 2 * std::abs(d21) < tau3;
  return !small || 2 * std::abs(d22) < tau1 + tau2 + tau3;
}

std::size_t count_subset_violations(std::size_t n_quadruples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<TimePs> time(-1'000'000, 1'000'000);
  std::uniform_int_distribution<TimePs> half(1, 1'000'000);
  std::size_t violations = 0;
  for (std::size_t n = 0; n < n_quadruples; ++n) {
    // Differences of local times satisfy the telescoping identity by construction.
    const TimePs ta1 = time(rng), ta2 = time(rng), tb1 = time(rng), tb2 = time(rng);
    const TimePs d11 = ta1 - tb1, d12 = ta1 - tb2, d21 = ta2 - tb1;
    const TimePs d22 = d12 + d21 - d11;
    if (!subset_implication_holds(d11, d12, d21, d22, 2 * half(rng), 2 * half(rng), 2 * half(rng))) ++violations;
  }
  return violations;
}

}  // namespace tagbell
