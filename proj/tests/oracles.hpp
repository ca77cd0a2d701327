// Test-only reference implementations. Each one takes a different route from
// the library code it checks: exhaustive search, explicit scans, or explicit
// state vectors.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "tagbell/timetag.hpp"

namespace tagbell::oracle {

// Maximum bipartite matching under |a - b| < tau / 2 by exhaustive search.
inline std::size_t max_matching(const std::vector<TimePs>& a, const std::vector<TimePs>& b, TimePs tau) {
  std::function<std::size_t(std::size_t, std::uint32_t)> best = [&](std::size_t i, std::uint32_t used) {
    if (i == a.size()) return std::size_t{0};
    std::size_t result = best(i + 1, used);
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (used & (1u << j)) continue;
      const double d = std::fabs(static_cast<double>(a[i] - b[j]));
      if (d < static_cast<double>(tau) / 2.0) result = std::max(result, 1 + best(i + 1, used | (1u << j)));
    }
    return result;
  };
  return best(0, 0);
}

// Slot id found by walking the slot boundaries from the offset.
inline std::int64_t scan_slot(TimePs t, TimePs tau, TimePs offset) {
  std::int64_t i = 0;
  TimePs lo = offset;
  while (t < lo) {
    lo -= tau;
    --i;
  }
  while (t >= lo + tau) {
    lo += tau;
    ++i;
  }
  return i;
}

// Born rule with an explicit two-qubit state vector in the basis
// |HH>, |HV>, |VH>, |VV> and the state (|HV> + r|VH>)/sqrt(1 + r^2).
struct BornOracle {
  double p_a, p_b, p_ab;
};

inline BornOracle born(double r, double alpha, double beta) {
  const double n = std::sqrt(1.0 + r * r);
  const std::array<double, 4> psi{0.0, 1.0 / n, r / n, 0.0};
  const std::array<double, 2> pa{std::cos(alpha), std::sin(alpha)};
  const std::array<double, 2> pb{std::cos(beta), std::sin(beta)};
  const std::array<std::array<double, 2>, 2> basis{{{1.0, 0.0}, {0.0, 1.0}}};
  auto amp = [&](const std::array<double, 2>& x, const std::array<double, 2>& y) {
    double s = 0.0;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) s += x[i] * y[j] * psi[2 * i + j];
    return s;
  };
  BornOracle o{};
  o.p_ab = amp(pa, pb) * amp(pa, pb);
  for (const auto& e : basis) {
    o.p_a += amp(pa, e) * amp(pa, e);
    o.p_b += amp(e, pb) * amp(e, pb);
  }
  return o;
}

// Random sorted tag times in [0, span).
inline std::vector<TimePs> sorted_times(std::mt19937_64& rng, std::size_t n, TimePs span) {
  std::uniform_int_distribution<TimePs> t(0, span - 1);
  std::vector<TimePs> v(n);
  for (auto& x : v) x = t(rng);
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace tagbell::oracle
