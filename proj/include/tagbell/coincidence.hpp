// Pair identification: moving window, fixed time slots, and window sum.
#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "tagbell/timetag.hpp"

namespace tagbell {

enum class Method { moving_window, fixed_slots, window_sum };

std::string_view method_name(Method m);
// Accepts the long names and the CLI short forms moving|slots|winsum.
Method parse_method(std::string_view name);

struct AnalysisConfig {
  Method method = Method::moving_window;
  TimePs tau_ps = 0;
  TimePs slot_offset_ps = 0;
  TimePs tau1_ps = 0;
  TimePs tau2_ps = 0;
  TimePs tau3_ps = 0;

  static AnalysisConfig moving(TimePs tau);
  static AnalysisConfig slots(TimePs tau, TimePs offset = 0);
  static AnalysisConfig window_sum(TimePs tau1, TimePs tau2, TimePs tau3);
  // Same method with every window set to tau (window sum: tau1 = tau2 = tau3 = tau).
  AnalysisConfig with_tau(TimePs tau) const;

  // Throws ValidationError unless the windows for the method are positive and even.
  void validate() const;
  // Coincidence window used for setting pair (a, b). The a2b2 window-sum
  // window is tau1 + tau2 + tau3.
  TimePs window_for(Setting a, Setting b) const;
  // Largest window any setting pair uses.
  TimePs max_window() const;

  friend bool operator==(const AnalysisConfig&, const AnalysisConfig&) = default;
};

using CountTable = std::array<std::array<std::uint64_t, 2>, 2>;

// Per-combination tallies, all indexed [a][b].
struct CoincidenceCounts {
  CountTable coincidences{};
  CountTable singles_a{};
  CountTable singles_b{};
  Exposure exposure{};
  AnalysisConfig config;

  CoincidenceCounts& operator+=(const CoincidenceCounts& other);
  friend bool operator==(const CoincidenceCounts&, const CoincidenceCounts&) = default;
};

struct MatchedPair {
  std::size_t segment = 0;
  Setting a = Setting::One;
  Setting b = Setting::One;
  TimePs t_a = 0;
  TimePs t_b = 0;

  friend bool operator==(const MatchedPair&, const MatchedPair&) = default;
};

// Two-pointer matching of sorted tag times under |t_a - t_b| < tau/2.
// Each tag joins at most one pair; a tag is paired with the earliest
// still-unmatched compatible partner. Returns index pairs (i into a, j into b).
// The result is a maximum matching for this interval-compatibility graph.
std::vector<std::pair<std::size_t, std::size_t>> greedy_match(std::span<const TimePs> a,
                                                              std::span<const TimePs> b, TimePs tau);
std::size_t greedy_match_count(std::span<const TimePs> a, std::span<const TimePs> b, TimePs tau);

// floor((t - offset) / tau); slots are half-open [offset + i*tau, offset + (i+1)*tau).
std::int64_t slot_index(TimePs t, TimePs tau, TimePs offset);

CoincidenceCounts moving_window_count(const TagStream& a, const TagStream& b, const SettingSchedule& schedule,
                                      TimePs tau, std::vector<MatchedPair>* pairs = nullptr);
CoincidenceCounts fixed_slot_count(const TagStream& a, const TagStream& b, const SettingSchedule& schedule,
                                   TimePs tau, TimePs offset, std::vector<MatchedPair>* pairs = nullptr);
CoincidenceCounts window_sum_count(const TagStream& a, const TagStream& b, const SettingSchedule& schedule,
                                   TimePs tau1, TimePs tau2, TimePs tau3,
                                   std::vector<MatchedPair>* pairs = nullptr);

// Dispatches on config.method after validating the config.
CoincidenceCounts count_coincidences(const Run& run, const AnalysisConfig& config,
                                     std::vector<MatchedPair>* pairs = nullptr);

// Audit CSV: segment,setting_a,setting_b,t_a_ps,t_b_ps
std::string pairs_csv(std::span<const MatchedPair> pairs);

}  // namespace tagbell
