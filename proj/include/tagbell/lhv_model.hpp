// Finite local-hidden-variable models.
//
// Each hidden-variable value carries an integer weight (the distribution is
// weight / total_weight, so every probability is an exact rational), local
// outcome bits and local detection delays. Alice's entries depend only on
// her setting and Bob's only on his, so locality holds by construction.
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tagbell/timetag.hpp"

namespace tagbell {

struct HiddenValue {
  std::uint64_t weight = 1;
  std::array<bool, 2> outcome_a{};  // A_j(lambda), indexed by setting
  std::array<bool, 2> outcome_b{};  // B_k(lambda)
  std::array<std::optional<TimePs>, 2> time_a{};  // T_A(a_j, lambda); nullopt means no detection
  std::array<std::optional<TimePs>, 2> time_b{};  // T_B(b_k, lambda)

  // Detection time when the outcome is 1 and a time exists.
  std::optional<TimePs> tag_a(std::size_t j) const { return outcome_a[j] ? time_a[j] : std::nullopt; }
  std::optional<TimePs> tag_b(std::size_t k) const { return outcome_b[k] ? time_b[k] : std::nullopt; }

  friend bool operator==(const HiddenValue&, const HiddenValue&) = default;
};

struct LhvModel {
  std::string name;
  std::vector<HiddenValue> lambdas;

  std::uint64_t total_weight() const;
  // Largest |T| over all present delays.
  TimePs max_abs_delay() const;
  // Throws ValidationError for an empty model or a zero total weight.
  void validate() const;

  friend bool operator==(const LhvModel&, const LhvModel&) = default;
};

}  // namespace tagbell
