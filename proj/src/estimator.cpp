#include "tagbell/estimator.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

namespace tagbell {

namespace {

std::array<std::array<double, 2>, 2> exposure_weights(const CoincidenceCounts& c, const JOptions& options) {
  std::array<std::array<double, 2>, 2> w{{{1.0, 1.0}, {1.0, 1.0}}};
  if (!options.normalize_exposure) return w;
  double total = 0.0;
  for (const auto& row : c.exposure)
    for (TimePs e : row) {
      if (e <= 0) return w;
      total += static_cast<double>(e);
    }
  const double mean = total / 4.0;
  for (std::size_t j = 0; j < 2; ++j)
    for (std::size_t k = 0; k < 2; ++k) w[j][k] = mean / static_cast<double>(c.exposure[j][k]);
  return w;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

double j_statistic(const CoincidenceCounts& c, const JOptions& options) {
  const auto w = exposure_weights(c, options);
  auto n = [&](const CountTable& t, std::size_t j, std::size_t k) { return w[j][k] * static_cast<double>(t[j][k]); };
  double singles_a1 = 0.0;
  double singles_b1 = 0.0;
  if (options.singles == SinglesMode::averaged) {
    singles_a1 = 0.5 * (n(c.singles_a, 0, 0) + n(c.singles_a, 0, 1));
    singles_b1 = 0.5 * (n(c.singles_b, 0, 0) + n(c.singles_b, 1, 0));
  } else {
    singles_a1 = n(c.singles_a, 0, 0);
    singles_b1 = n(c.singles_b, 0, 0);
  }
  return singles_a1 + singles_b1 - n(c.coincidences, 0, 0) - n(c.coincidences, 0, 1) - n(c.coincidences, 1, 0) +
         n(c.coincidences, 1, 1);
}

double JStatistic::z() const {
  if (sigma > 0.0) return j / sigma;
  if (j == 0.0) return 0.0;
  return j > 0.0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
}

double sigma_of_sum(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) return 0.0;
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sample_var = ss / static_cast<double>(n - 1);
  return std::sqrt(static_cast<double>(n) * sample_var);
}

JStatistic sigma_estimate(const Run& run, const AnalysisConfig& config, std::size_t n_subsets,
                          const JOptions& options) {
  config.validate();
  if (n_subsets < 2) throw InsufficientDataError("insufficient data for subset estimate: need at least 2 subsets");
  const TimePs duration = run.duration_ps();
  const TimePs block = duration / static_cast<TimePs>(n_subsets);
  if (block <= 0 || block < config.max_window() || segments(run.schedule).empty())
    throw InsufficientDataError("insufficient data for subset estimate");

  JStatistic out;
  out.config = config;
  out.n_subsets = n_subsets;
  out.counts = count_coincidences(run, config);
  out.j = j_statistic(out.counts, options);
  out.subset_j.reserve(n_subsets);
  // Remainder time after the last full block is left out of the subsets.
  for (std::size_t i = 0; i < n_subsets; ++i) {
    const TimePs begin = static_cast<TimePs>(i) * block;
    const Run part = slice(run, begin, begin + block);
    out.subset_j.push_back(j_statistic(count_coincidences(part, config), options));
  }
  out.sigma = sigma_of_sum(out.subset_j);
  return out;
}

SweepResult sweep_tau(const Run& run, Method method, std::span<const TimePs> tau_grid, TimePs slot_offset_ps,
                      std::size_t n_subsets, const JOptions& options) {
  for (std::size_t i = 1; i < tau_grid.size(); ++i)
    if (tau_grid[i] <= tau_grid[i - 1]) throw ValidationError("tau grid must be strictly increasing");
  AnalysisConfig base;
  base.method = method;
  base.slot_offset_ps = slot_offset_ps;
  SweepResult result{method, {}};
  result.rows.reserve(tau_grid.size());
  for (TimePs tau : tau_grid) {
    const auto stat = sigma_estimate(run, base.with_tau(tau), n_subsets, options);
    result.rows.push_back({tau, stat.j, stat.sigma});
  }
  return result;
}

std::string sweep_csv(std::span<const SweepResult> results) {
  std::string out = "tau_ps,method,J,sigma\n";
  for (const auto& r : results)
    for (const auto& row : r.rows)
      out += std::to_string(row.tau_ps) + ',' + std::string(method_name(r.method)) + ',' + format_double(row.j) +
             ',' + format_double(row.sigma) + '\n';
  return out;
}

}  // namespace tagbell
