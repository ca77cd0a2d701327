// Batch front end: simulate, analyze, sweep, verify, exploit-demo.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "tagbell/estimator.hpp"

namespace tagbell {

// Exit codes: 0 success, 1 validation or usage error, 2 I/O error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

struct ExploitDemoResult {
  JStatistic moving;
  JStatistic slots;
  JStatistic window_sum;
};

// Builds the exploit model, simulates n_trials and analyses the run with all
// three methods at the design window.
ExploitDemoResult run_exploit_demo(std::size_t n_trials, std::uint64_t seed, TimePs delta_ps, TimePs tau_ps,
                                   std::size_t n_subsets = 30);

}  // namespace tagbell
