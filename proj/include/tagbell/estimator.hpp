// Count-form J statistic, block-based uncertainty, and J(tau) sweeps.
//
// J = S_A1 + S_B1 - C11 - C12 - C21 + C22. Local realism predicts J >= 0;
// a violation is J < 0.
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tagbell/coincidence.hpp"

namespace tagbell {

// Raised when a run cannot be split into the requested number of blocks.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

enum class SinglesMode {
  averaged,          // S_A1 = mean over (a1,b1),(a1,b2); S_B1 = mean over (a1,b1),(a2,b1)
  first_combination  // singles from the (a1,b1) combination only
};

struct JOptions {
  SinglesMode singles = SinglesMode::averaged;
  // Rescale every count of a combination to the mean exposure of the four
  // combinations. Ignored unless all four exposures are positive.
  bool normalize_exposure = true;
};

double j_statistic(const CoincidenceCounts& counts, const JOptions& options = {});

struct JStatistic {
  double j = 0.0;
  double sigma = 0.0;
  std::size_t n_subsets = 0;
  std::vector<double> subset_j;
  CoincidenceCounts counts;
  AnalysisConfig config;

  // J / sigma; 0 when both vanish, +-infinity when only sigma does.
  double z() const;
};

// sqrt(n) times the unbiased sample standard deviation of the block values:
// the standard deviation of a sum of n blocks.
double sigma_of_sum(std::span<const double> block_values);

// J from the full run, sigma from n_subsets equal-duration contiguous blocks.
JStatistic sigma_estimate(const Run& run, const AnalysisConfig& config, std::size_t n_subsets = 30,
                          const JOptions& options = {});

struct SweepRow {
  TimePs tau_ps = 0;
  double j = 0.0;
  double sigma = 0.0;
};

struct SweepResult {
  Method method = Method::moving_window;
  std::vector<SweepRow> rows;
};

// One (J, sigma) per grid value. For window sum every tau_i equals the grid value.
SweepResult sweep_tau(const Run& run, Method method, std::span<const TimePs> tau_grid, TimePs slot_offset_ps = 0,
                      std::size_t n_subsets = 30, const JOptions& options = {});

// CSV rows tau_ps,method,J,sigma with a header line.
std::string sweep_csv(std::span<const SweepResult> results);

}  // namespace tagbell
