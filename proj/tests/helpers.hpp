#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "tagbell/timetag.hpp"

namespace tagbell::testing {

// One setting pair for the whole run.
inline Run single_segment_run(const std::vector<TimePs>& a, const std::vector<TimePs>& b, TimePs duration,
                              Setting sa = Setting::One, Setting sb = Setting::One) {
  std::vector<DetectionEvent> ea;
  std::vector<DetectionEvent> eb;
  for (TimePs t : a) ea.push_back({t, Site::A, sa});
  for (TimePs t : b) eb.push_back({t, Site::B, sb});
  SettingSchedule s{{{0, duration, sa}}, {{0, duration, sb}}};
  return make_run(std::move(ea), std::move(eb), std::move(s), duration);
}

// Random run with per-side setting intervals of random length.
inline Run random_run(std::mt19937_64& rng, std::size_t n_a, std::size_t n_b, TimePs duration, TimePs mean_block) {
  SettingSchedule s;
  std::bernoulli_distribution coin(0.5);
  std::uniform_int_distribution<TimePs> len(1, 2 * mean_block);
  for (Site site : {Site::A, Site::B}) {
    for (TimePs t = 0; t < duration;) {
      const TimePs end = std::min(duration, t + len(rng));
      s.side(site).push_back({t, end, coin(rng) ? Setting::Two : Setting::One});
      t = end;
    }
  }
  std::uniform_int_distribution<TimePs> when(0, duration - 1);
  auto events = [&](Site site, std::size_t n) {
    std::vector<TimePs> ts(n);
    for (auto& t : ts) t = when(rng);
    std::sort(ts.begin(), ts.end());
    std::vector<DetectionEvent> ev;
    for (TimePs t : ts) ev.push_back({t, site, *s.setting_at(site, t)});
    return ev;
  };
  auto a = events(Site::A, n_a);
  auto b = events(Site::B, n_b);
  return make_run(std::move(a), std::move(b), std::move(s), duration);
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& name) : path(std::filesystem::temp_directory_path() / name) {
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::filesystem::path operator/(const std::string& f) const { return path / f; }
};

}  // namespace tagbell::testing
