#include "tagbell/coincidence.hpp"

#include <algorithm>
#include <string>

namespace tagbell {

namespace {

std::int64_t floor_div(std::int64_t num, std::int64_t den) {
  std::int64_t q = num / den;
  if ((num % den != 0) && ((num < 0) != (den < 0))) --q;
  return q;
}

std::int64_t ceil_div(std::int64_t num, std::int64_t den) { return -floor_div(-num, den); }

std::span<const TimePs> in_range(const std::vector<TimePs>& times, TimePs lo, TimePs hi) {
  auto first = std::lower_bound(times.begin(), times.end(), lo);
  auto last = std::lower_bound(first, times.end(), hi);
  return {first, last};
}

// Moving-window matching per segment; window_of(segment) picks the window.
template <typename WindowOf>
CoincidenceCounts match_by_segment(const TagStream& a, const TagStream& b, const SettingSchedule& schedule,
                                   WindowOf window_of, std::vector<MatchedPair>* pairs) {
  CoincidenceCounts counts;
  const auto ta = a.times();
  const auto tb = b.times();
  const auto segs = segments(schedule);
  for (std::size_t k = 0; k < segs.size(); ++k) {
    const auto& seg = segs[k];
    const std::size_t ja = index_of(seg.a);
    const std::size_t jb = index_of(seg.b);
    const auto sa = in_range(ta, seg.start_ps, seg.end_ps);
    const auto sb = in_range(tb, seg.start_ps, seg.end_ps);
    const TimePs window = window_of(seg);
    counts.singles_a[ja][jb] += sa.size();
    counts.singles_b[ja][jb] += sb.size();
    counts.exposure[ja][jb] += seg.end_ps - seg.start_ps;
    if (pairs) {
      const auto matched = greedy_match(sa, sb, window);
      counts.coincidences[ja][jb] += matched.size();
      for (auto [i, j] : matched) pairs->push_back({k, seg.a, seg.b, sa[i], sb[j]});
    } else {
      counts.coincidences[ja][jb] += greedy_match_count(sa, sb, window);
    }
  }
  return counts;
}

struct SlotHit {
  std::int64_t slot;
  TimePs first_time;
};

}  // namespace

std::string_view method_name(Method m) {
  switch (m) {
    case Method::moving_window: return "moving_window";
    case Method::fixed_slots: return "fixed_slots";
    case Method::window_sum: return "window_sum";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  if (name == "moving" || name == "moving_window") return Method::moving_window;
  if (name == "slots" || name == "fixed_slots") return Method::fixed_slots;
  if (name == "winsum" || name == "window_sum") return Method::window_sum;
  throw ValidationError("unknown method '" + std::string(name) + "'");
}

AnalysisConfig AnalysisConfig::moving(TimePs tau) { return {Method::moving_window, tau, 0, 0, 0, 0}; }
AnalysisConfig AnalysisConfig::slots(TimePs tau, TimePs offset) { return {Method::fixed_slots, tau, offset, 0, 0, 0}; }
AnalysisConfig AnalysisConfig::window_sum(TimePs tau1, TimePs tau2, TimePs tau3) {
  return {Method::window_sum, 0, 0, tau1, tau2, tau3};
}

AnalysisConfig AnalysisConfig::with_tau(TimePs tau) const {
  switch (method) {
    case Method::moving_window: return moving(tau);
    case Method::fixed_slots: return slots(tau, slot_offset_ps);
    case Method::window_sum: return window_sum(tau, tau, tau);
  }
  return *this;
}

void AnalysisConfig::validate() const {
  auto check = [](TimePs w, const char* name) {
    if (w <= 0) throw ValidationError(std::string(name) + " must be positive, got " + std::to_string(w));
    if (w % 2 != 0) throw ValidationError(std::string(name) + " must be even, got " + std::to_string(w));
  };
  switch (method) {
    case Method::moving_window:
      check(tau_ps, "tau_ps");
      break;
    case Method::fixed_slots:
      check(tau_ps, "tau_ps");
      if (slot_offset_ps < 0) throw ValidationError("slot_offset_ps must be non-negative");
      break;
    case Method::window_sum:
      check(tau1_ps, "tau1_ps");
      check(tau2_ps, "tau2_ps");
      check(tau3_ps, "tau3_ps");
      break;
  }
}

TimePs AnalysisConfig::window_for(Setting a, Setting b) const {
  if (method != Method::window_sum) return tau_ps;
  if (a == Setting::One) return b == Setting::One ? tau1_ps : tau2_ps;
  return b == Setting::One ? tau3_ps : tau1_ps + tau2_ps + tau3_ps;
}

TimePs AnalysisConfig::max_window() const {
  return method == Method::window_sum ? tau1_ps + tau2_ps + tau3_ps : tau_ps;
}

CoincidenceCounts& CoincidenceCounts::operator+=(const CoincidenceCounts& other) {
  for (std::size_t j = 0; j < 2; ++j) {
    for (std::size_t k = 0; k < 2; ++k) {
      coincidences[j][k] += other.coincidences[j][k];
      singles_a[j][k] += other.singles_a[j][k];
      singles_b[j][k] += other.singles_b[j][k];
      exposure[j][k] += other.exposure[j][k];
    }
  }
  return *this;
}

std::vector<std::pair<std::size_t, std::size_t>> greedy_match(std::span<const TimePs> a, std::span<const TimePs> b,
                                                              TimePs tau) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() && j < b.size()) {
    // 2|d| < tau is |d| < tau/2 without rounding.
    const TimePs d = a[i] - b[j];
    if (2 * d >= tau)
      ++j;  // b[j] precedes every remaining a by at least tau/2
    else if (-2 * d >= tau)
      ++i;  // a[i] precedes every remaining b by at least tau/2
    else
      out.emplace_back(i++, j++);
  }
  return out;
}

std::size_t greedy_match_count(std::span<const TimePs> a, std::span<const TimePs> b, TimePs tau) {
  std::size_t n = 0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() && j < b.size()) {
    const TimePs d = a[i] - b[j];
    if (2 * d >= tau) {
      ++j;
    } else if (-2 * d >= tau) {
      ++i;
    } else {
      ++n;
      ++i;
      ++j;
    }
  }
  return n;
}

std::int64_t slot_index(TimePs t, TimePs tau, TimePs offset) { return floor_div(t - offset, tau); }

CoincidenceCounts moving_window_count(const TagStream& a, const TagStream& b, const SettingSchedule& schedule,
                                      TimePs tau, std::vector<MatchedPair>* pairs) {
  auto counts = match_by_segment(a, b, schedule, [tau](const Segment&) { return tau; }, pairs);
  counts.config = AnalysisConfig::moving(tau);
  return counts;
}

CoincidenceCounts window_sum_count(const TagStream& a, const TagStream& b, const SettingSchedule& schedule,
                                   TimePs tau1, TimePs tau2, TimePs tau3, std::vector<MatchedPair>* pairs) {
  const auto config = AnalysisConfig::window_sum(tau1, tau2, tau3);
  auto counts = match_by_segment(
      a, b, schedule, [&config](const Segment& s) { return config.window_for(s.a, s.b); }, pairs);
  counts.config = config;
  return counts;
}

CoincidenceCounts fixed_slot_count(const TagStream& a, const TagStream& b, const SettingSchedule& schedule,
                                   TimePs tau, TimePs offset, std::vector<MatchedPair>* pairs) {
  CoincidenceCounts counts;
  counts.config = AnalysisConfig::slots(tau, offset);
  const auto segs = segments(schedule);
  if (segs.empty()) return counts;
  // Slots are clipped to the scheduled range; only setting changes inside a
  // slot (on either side) discard it.
  const TimePs begin = segs.front().start_ps;
  const TimePs end = segs.back().end_ps;
  const auto ta = a.times();
  const auto tb = b.times();

  for (std::size_t k = 0; k < segs.size(); ++k) {
    const auto& seg = segs[k];
    const std::size_t ja = index_of(seg.a);
    const std::size_t jb = index_of(seg.b);
    const std::int64_t first =
        seg.start_ps == begin ? slot_index(seg.start_ps, tau, offset) : ceil_div(seg.start_ps - offset, tau);
    const std::int64_t last =
        seg.end_ps == end ? slot_index(seg.end_ps - 1, tau, offset) : floor_div(seg.end_ps - offset, tau) - 1;
    if (last < first) continue;
    counts.exposure[ja][jb] += std::min(offset + (last + 1) * tau, seg.end_ps) -
                               std::max(offset + first * tau, seg.start_ps);

    auto occupied = [&](std::span<const TimePs> times) {
      std::vector<SlotHit> hits;
      for (TimePs t : times) {
        const auto i = slot_index(t, tau, offset);
        if (i < first || i > last) continue;
        if (hits.empty() || hits.back().slot != i) hits.push_back({i, t});
      }
      return hits;
    };
    const auto ha = occupied(in_range(ta, seg.start_ps, seg.end_ps));
    const auto hb = occupied(in_range(tb, seg.start_ps, seg.end_ps));
    counts.singles_a[ja][jb] += ha.size();
    counts.singles_b[ja][jb] += hb.size();

    std::size_t i = 0;
    std::size_t j = 0;
    while (i < ha.size() && j < hb.size()) {
      if (ha[i].slot < hb[j].slot) {
        ++i;
      } else if (hb[j].slot < ha[i].slot) {
        ++j;
      } else {
        ++counts.coincidences[ja][jb];
        if (pairs) pairs->push_back({k, seg.a, seg.b, ha[i].first_time, hb[j].first_time});
        ++i;
        ++j;
      }
    }
  }
  return counts;
}

CoincidenceCounts count_coincidences(const Run& run, const AnalysisConfig& config, std::vector<MatchedPair>* pairs) {
  config.validate();
  switch (config.method) {
    case Method::moving_window:
      return moving_window_count(run.a, run.b, run.schedule, config.tau_ps, pairs);
    case Method::fixed_slots:
      return fixed_slot_count(run.a, run.b, run.schedule, config.tau_ps, config.slot_offset_ps, pairs);
    case Method::window_sum:
      return window_sum_count(run.a, run.b, run.schedule, config.tau1_ps, config.tau2_ps, config.tau3_ps, pairs);
  }
  return {};
}

std::string pairs_csv(std::span<const MatchedPair> pairs) {
  std::string out = "segment,setting_a,setting_b,t_a_ps,t_b_ps\n";
  for (const auto& p : pairs) {
    out += std::to_string(p.segment) + ',' + std::to_string(static_cast<int>(p.a)) + ',' +
           std::to_string(static_cast<int>(p.b)) + ',' + std::to_string(p.t_a) + ',' + std::to_string(p.t_b) + '\n';
  }
  return out;
}

}  // namespace tagbell
