// Exact evaluation of CH-type margins on finite hidden-variable models and a
// randomized search for counterexamples.
#pragma once

#include <cstdint>
#include <vector>

#include "tagbell/coincidence.hpp"
#include "tagbell/lhv_model.hpp"

namespace tagbell {

__extension__ typedef __int128 WideInt;

// num / den with den > 0.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  int sign() const { return (num > 0) - (num < 0); }
  friend bool operator==(const Rational& x, const Rational& y) {
    return static_cast<WideInt>(x.num) * y.den == static_cast<WideInt>(y.num) * x.den;
  }
  friend bool operator<(const Rational& x, const Rational& y) {
    return static_cast<WideInt>(x.num) * y.den < static_cast<WideInt>(y.num) * x.den;
  }
};

// Probabilities as integer numerators over a common denominator (the model's
// total weight). Indexed [a][b] for joints, by setting for singles.
struct ExactTable {
  std::int64_t denominator = 1;
  std::array<std::array<std::int64_t, 2>, 2> joint{};  // P(A_j = B_k = 1 and lambda in the coincidence set)
  std::array<std::int64_t, 2> singles_a{};              // P(A_j = 1 and detected)
  std::array<std::int64_t, 2> singles_b{};              // P(B_k = 1 and detected)
  AnalysisConfig config;

  // P(A1) + P(B1) - P11 - P12 - P21 + P22; the rearranged CH form, >= 0 under
  // local realism when the coincidence sets have slot or subset structure.
  Rational margin() const;
};

// Whether hidden value h puts (a_j, b_k) in the coincidence set of the
// config's method. origin_ps places the trial on the slot grid.
bool in_coincidence_set(const HiddenValue& h, std::size_t j, std::size_t k, const AnalysisConfig& config,
                        TimePs origin_ps = 0);

// Weighted enumeration over the hidden-variable values.
ExactTable exact_counts(const LhvModel& model, const AnalysisConfig& config, TimePs origin_ps = 0);

enum class Theorem { ch, slots, window_sum };

// Margin (right side minus left side) of the inequality matching the config:
// ch pairs with moving windows, slots with fixed slots, window_sum with
// window sum. Throws ValidationError on a mismatch.
Rational check_theorem(const LhvModel& model, const AnalysisConfig& config, Theorem which, TimePs origin_ps = 0);

struct SearchBounds {
  std::size_t max_lambdas = 64;
  int delay_grid = 8;               // delays are uniform on {-G..G} * step
  TimePs delay_step_ps = 1'000;
  std::uint64_t max_weight = 16;    // weights uniform on {1..max_weight}
};

struct WorstCase {
  Method method = Method::moving_window;
  std::size_t n_models = 0;
  Rational min_margin;
  LhvModel argmin_model;
  AnalysisConfig argmin_config;
};

// A random model and a random config per method, both drawn from one
// sub-seed derived from (seed, index).
LhvModel random_model(const SearchBounds& bounds, std::uint64_t seed, std::size_t index);
AnalysisConfig random_config(Method method, const SearchBounds& bounds, std::uint64_t seed, std::size_t index);

// Minimum margin per method over n_models random models. Empty for n_models = 0.
std::vector<WorstCase> random_model_search(std::size_t n_models, const SearchBounds& bounds, std::uint64_t seed);

// For delays obeying d22 = d12 + d21 - d11: the three small-window
// memberships imply membership in the tau1 + tau2 + tau3 window.
bool subset_implication_holds(TimePs d11, TimePs d12, TimePs d21, TimePs d22, TimePs tau1, TimePs tau2,
                              TimePs tau3);
// Counts violations of subset_implication_holds over random quadruples.
std::size_t count_subset_violations(std::size_t n_quadruples, std::uint64_t seed);

}  // namespace tagbell
