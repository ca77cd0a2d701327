#include <doctest.h>

#include <random>
#include <set>

#include "helpers.hpp"
#include "oracles.hpp"
#include "tagbell/coincidence.hpp"

using namespace tagbell;
using testing::single_segment_run;

namespace {

CountTable table(std::uint64_t x11, std::uint64_t x12, std::uint64_t x21, std::uint64_t x22) {
  return {{{x11, x12}, {x21, x22}}};
}

// Slot counts by scanning every slot and testing it against the schedule
// boundaries directly.
CoincidenceCounts brute_slots(const Run& run, TimePs tau, TimePs offset) {
  CoincidenceCounts c;
  c.config = AnalysisConfig::slots(tau, offset);
  const TimePs duration = run.duration_ps();
  std::vector<TimePs> cuts;
  for (Site s : {Site::A, Site::B})
    for (const auto& iv : run.schedule.side(s)) cuts.push_back(iv.start_ps);
  const std::int64_t lo = oracle::scan_slot(0, tau, offset);
  const std::int64_t hi = oracle::scan_slot(duration - 1, tau, offset);
  for (std::int64_t i = lo; i <= hi; ++i) {
    const TimePs start = std::max<TimePs>(0, offset + i * tau);
    const TimePs end = std::min(duration, offset + (i + 1) * tau);
    if (start >= end) continue;
    bool split = false;
    for (TimePs cut : cuts) split |= cut > start && cut < end;
    if (split) continue;
    const auto ja = index_of(*run.schedule.setting_at(Site::A, start));
    const auto jb = index_of(*run.schedule.setting_at(Site::B, start));
    c.exposure[ja][jb] += end - start;
    auto any_in = [&](const TagStream& s) {
      for (const auto& e : s.events)
        if (e.time_ps >= start && e.time_ps < end) return true;
      return false;
    };
    const bool va = any_in(run.a);
    const bool vb = any_in(run.b);
    c.singles_a[ja][jb] += va;
    c.singles_b[ja][jb] += vb;
    c.coincidences[ja][jb] += va && vb;
  }
  return c;
}

// Same run seen from the other side.
Run swap_sites(const Run& run) {
  auto relabel = [](const std::vector<DetectionEvent>& ev, Site s) {
    auto out = ev;
    for (auto& e : out) e.site = s;
    return out;
  };
  SettingSchedule s{run.schedule.b, run.schedule.a};
  return make_run(relabel(run.b.events, Site::A), relabel(run.a.events, Site::B), s, run.duration_ps());
}

}  // namespace

TEST_CASE("moving window examples") {
  auto c = [](std::vector<TimePs> a, std::vector<TimePs> b, TimePs tau) {
    return count_coincidences(single_segment_run(a, b, 2'000'000), AnalysisConfig::moving(tau));
  };
  CHECK(c({1'000'000}, {1'400'000}, 980'000).coincidences[0][0] == 1);
  CHECK(c({0}, {490'000}, 980'000).coincidences[0][0] == 0);
  const auto three = c({0, 100}, {50}, 980'000);
  CHECK(three.coincidences[0][0] == 1);
  CHECK(three.singles_a[0][0] == 2);
  CHECK(three.singles_b[0][0] == 1);
  CHECK(oracle::max_matching({0, 100}, {50}, 980'000) == 1);
}

TEST_CASE("slot index examples") {
  CHECK(slot_index(1500, 1000, 0) == 1);
  CHECK(slot_index(1000, 1000, 0) == 1);
  CHECK(slot_index(999, 1000, 0) == 0);
  CHECK(slot_index(-1, 1000, 0) == -1);
  CHECK(slot_index(250, 1000, 300) == -1);
}

TEST_CASE("fixed slot examples") {
  const auto coarse = count_coincidences(single_segment_run({10, 20}, {30}, 980'000), AnalysisConfig::slots(980'000));
  CHECK(coarse.coincidences == table(1, 0, 0, 0));
  CHECK(coarse.singles_a[0][0] == 1);

  const auto split = count_coincidences(single_segment_run({999'999}, {1'000'001}, 3'000'000),
                                        AnalysisConfig::slots(1'000'000));
  CHECK(split.coincidences[0][0] == 0);

  const auto none = count_coincidences(single_segment_run({}, {}, 3'000'000), AnalysisConfig::slots(1'000));
  CHECK(none.coincidences == table(0, 0, 0, 0));
  CHECK(none.singles_a == table(0, 0, 0, 0));
  CHECK(none.exposure[0][0] == 3'000'000);
}

TEST_CASE("slots containing a setting change are discarded") {
  SettingSchedule s{{{0, 1500, Setting::One}, {1500, 4000, Setting::Two}}, {{0, 4000, Setting::One}}};
  const Run run = make_run({{1200, Site::A, Setting::One}, {2200, Site::A, Setting::Two}},
                           {{1300, Site::B, Setting::One}, {2300, Site::B, Setting::One}}, s, 4000);
  const auto c = count_coincidences(run, AnalysisConfig::slots(1000));
  CHECK(c.coincidences == table(0, 0, 1, 0));
  CHECK(c.exposure == Exposure{{{1000, 0}, {2000, 0}}});
  CHECK(c == brute_slots(run, 1000, 0));
}

TEST_CASE("window sum examples") {
  const auto cfg = AnalysisConfig::window_sum(180'000, 180'000, 180'000);
  const auto wide = count_coincidences(single_segment_run({0}, {250'000}, 1'000'000, Setting::Two, Setting::Two), cfg);
  CHECK(wide.coincidences == table(0, 0, 0, 1));
  const auto narrow = count_coincidences(single_segment_run({0}, {250'000}, 1'000'000), cfg);
  CHECK(narrow.coincidences == table(0, 0, 0, 0));
  CHECK(AnalysisConfig::window_sum(100, 200, 300).window_for(Setting::Two, Setting::Two) == 600);
  CHECK(AnalysisConfig::window_sum(100, 200, 300).window_for(Setting::One, Setting::Two) == 200);
  CHECK(AnalysisConfig::window_sum(100, 200, 300).window_for(Setting::Two, Setting::One) == 300);
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS(AnalysisConfig::moving(981).validate(), ValidationError);
  CHECK_THROWS_AS(AnalysisConfig::moving(0).validate(), ValidationError);
  CHECK_THROWS_AS(AnalysisConfig::slots(1000, -2).validate(), ValidationError);
  CHECK_THROWS_AS(AnalysisConfig::window_sum(2, 3, 4).validate(), ValidationError);
  CHECK_NOTHROW(AnalysisConfig::window_sum(2, 4, 6).validate());
  CHECK(parse_method("winsum") == Method::window_sum);
  CHECK(parse_method("slots") == Method::fixed_slots);
  CHECK(parse_method("moving") == Method::moving_window);
  CHECK_THROWS_AS(parse_method("nearest"), ValidationError);
}

TEST_CASE("slot partition agrees with a boundary scan") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<TimePs> t(-50'000, 50'000);
  std::uniform_int_distribution<TimePs> tau(1, 3'000);
  std::uniform_int_distribution<TimePs> off(0, 5'000);
  for (int rep = 0; rep < 20'000; ++rep) {
    const TimePs x = t(rng), w = tau(rng), o = off(rng);
    const auto i = slot_index(x, w, o);
    CHECK(i == oracle::scan_slot(x, w, o));
    CHECK(o + i * w <= x);
    CHECK(x < o + (i + 1) * w);
  }
}

TEST_CASE("fixed slot counts agree with the slot scan on random runs") {
  std::mt19937_64 rng(17);
  for (int rep = 0; rep < 300; ++rep) {
    const Run run = testing::random_run(rng, rng() % 60, rng() % 60, 20'000, 1'500);
    const TimePs tau = 2 * (1 + static_cast<TimePs>(rng() % 400));
    const TimePs offset = static_cast<TimePs>(rng() % 1'000);
    CHECK(count_coincidences(run, AnalysisConfig::slots(tau, offset)) == brute_slots(run, tau, offset));
  }
}

TEST_CASE("site symmetry and count bounds") {
  std::mt19937_64 rng(23);
  for (int rep = 0; rep < 200; ++rep) {
    const Run run = testing::random_run(rng, rng() % 200, rng() % 200, 100'000, 5'000);
    const Run swapped = swap_sites(run);
    for (const auto& cfg : {AnalysisConfig::moving(1'000), AnalysisConfig::slots(1'000, 13),
                            AnalysisConfig::window_sum(400, 800, 1'200)}) {
      const auto c = count_coincidences(run, cfg);
      for (std::size_t j = 0; j < 2; ++j) {
        for (std::size_t k = 0; k < 2; ++k) {
          CHECK(c.coincidences[j][k] <= std::min(c.singles_a[j][k], c.singles_b[j][k]));
        }
      }
      if (cfg.method != Method::moving_window) continue;
      const auto s = count_coincidences(swapped, cfg);
      for (std::size_t j = 0; j < 2; ++j) {
        for (std::size_t k = 0; k < 2; ++k) {
          CHECK(s.coincidences[k][j] == c.coincidences[j][k]);
          CHECK(s.singles_a[k][j] == c.singles_b[j][k]);
          CHECK(s.singles_b[k][j] == c.singles_a[j][k]);
        }
      }
    }
  }
}

TEST_CASE("moving window counts never decrease with tau") {
  std::mt19937_64 rng(29);
  for (int rep = 0; rep < 100; ++rep) {
    const Run run = testing::random_run(rng, 150, 150, 100'000, 8'000);
    CountTable prev{};
    for (TimePs tau = 2; tau <= 20'000; tau = tau * 3 / 2 + 2 - (tau * 3 / 2) % 2) {
      const auto c = count_coincidences(run, AnalysisConfig::moving(tau)).coincidences;
      for (std::size_t j = 0; j < 2; ++j)
        for (std::size_t k = 0; k < 2; ++k) CHECK(c[j][k] >= prev[j][k]);
      prev = c;
    }
  }
}

TEST_CASE("emitted pairs are valid matchings") {
  std::mt19937_64 rng(31);
  for (int rep = 0; rep < 200; ++rep) {
    const Run run = testing::random_run(rng, rng() % 120, rng() % 120, 50'000, 4'000);
    const auto segs = segments(run.schedule);
    for (const auto& cfg : {AnalysisConfig::moving(900), AnalysisConfig::window_sum(300, 500, 700)}) {
      std::vector<MatchedPair> pairs;
      const auto c = count_coincidences(run, cfg, &pairs);
      std::uint64_t total = 0;
      for (const auto& row : c.coincidences)
        for (auto x : row) total += x;
      CHECK(pairs.size() == total);
      std::set<TimePs> used_a, used_b;
      for (const auto& p : pairs) {
        // Random runs draw distinct times often enough that duplicates only
        // weaken this check.
        used_a.insert(p.t_a);
        used_b.insert(p.t_b);
        REQUIRE(p.segment < segs.size());
        const auto& seg = segs[p.segment];
        CHECK(seg.a == p.a);
        CHECK(seg.b == p.b);
        CHECK(p.t_a >= seg.start_ps);
        CHECK(p.t_a < seg.end_ps);
        CHECK(p.t_b >= seg.start_ps);
        CHECK(p.t_b < seg.end_ps);
        CHECK(2 * std::abs(p.t_a - p.t_b) < cfg.window_for(p.a, p.b));
      }
      auto distinct = [](const std::vector<TimePs>& t) { return std::set<TimePs>(t.begin(), t.end()).size(); };
      if (distinct(run.a.times()) == run.a.events.size()) CHECK(used_a.size() == pairs.size());
      if (distinct(run.b.times()) == run.b.events.size()) CHECK(used_b.size() == pairs.size());
    }
  }
}

TEST_CASE("greedy index pairs use each tag once and respect the window") {
  std::mt19937_64 rng(37);
  for (int rep = 0; rep < 2'000; ++rep) {
    const auto a = oracle::sorted_times(rng, rng() % 30, 10'000);
    const auto b = oracle::sorted_times(rng, rng() % 30, 10'000);
    const TimePs tau = 2 * (1 + static_cast<TimePs>(rng() % 1'000));
    const auto m = greedy_match(a, b, tau);
    CHECK(m.size() == greedy_match_count(a, b, tau));
    std::set<std::size_t> ia, ib;
    for (auto [i, j] : m) {
      CHECK(ia.insert(i).second);
      CHECK(ib.insert(j).second);
      CHECK(2 * std::abs(a[i] - b[j]) < tau);
    }
  }
}

TEST_CASE("greedy matching is maximum on small segments") {
  std::mt19937_64 rng(41);
  for (int rep = 0; rep < 3'000; ++rep) {
    const std::size_t n = rng() % 13;
    const std::size_t na = n == 0 ? 0 : rng() % (n + 1);
    const auto a = oracle::sorted_times(rng, na, 2'000);
    const auto b = oracle::sorted_times(rng, n - na, 2'000);
    const TimePs tau = 2 * (1 + static_cast<TimePs>(rng() % 400));
    REQUIRE(greedy_match_count(a, b, tau) == oracle::max_matching(a, b, tau));
  }
}

TEST_CASE("window sum with equal windows is moving window, with 3 tau for a2b2") {
  std::mt19937_64 rng(43);
  for (int rep = 0; rep < 100; ++rep) {
    const Run run = testing::random_run(rng, 200, 200, 100'000, 7'000);
    const auto ws = count_coincidences(run, AnalysisConfig::window_sum(600, 600, 600));
    const auto m1 = count_coincidences(run, AnalysisConfig::moving(600));
    const auto m3 = count_coincidences(run, AnalysisConfig::moving(1'800));
    CHECK(ws.coincidences[0][0] == m1.coincidences[0][0]);
    CHECK(ws.coincidences[0][1] == m1.coincidences[0][1]);
    CHECK(ws.coincidences[1][0] == m1.coincidences[1][0]);
    CHECK(ws.coincidences[1][1] == m3.coincidences[1][1]);
    CHECK(ws.singles_a == m1.singles_a);
    CHECK(ws.exposure == m1.exposure);
  }
}

TEST_CASE("pairs never cross segment borders") {
  SettingSchedule s{{{0, 1000, Setting::One}, {1000, 2000, Setting::Two}}, {{0, 2000, Setting::One}}};
  const Run run = make_run({{999, Site::A, Setting::One}}, {{1001, Site::B, Setting::One}}, s, 2000);
  CHECK(count_coincidences(run, AnalysisConfig::moving(100)).coincidences == table(0, 0, 0, 0));
}

TEST_CASE("counts add per combination and pair csv has a header") {
  const auto c = count_coincidences(single_segment_run({1}, {2}, 10), AnalysisConfig::moving(4));
  auto sum = c;
  sum += c;
  CHECK(sum.coincidences[0][0] == 2);
  CHECK(sum.exposure[0][0] == 20);
  std::vector<MatchedPair> pairs{{0, Setting::One, Setting::Two, 5, 7}};
  CHECK(pairs_csv(pairs) == "segment,setting_a,setting_b,t_a_ps,t_b_ps\n0,1,2,5,7\n");
}
