#include "tagbell/lhv_model.hpp"

#include <algorithm>
#include <cstdlib>

namespace tagbell {

std::uint64_t LhvModel::total_weight() const {
  std::uint64_t w = 0;
  for (const auto& l : lambdas) w += l.weight;
  return w;
}

TimePs LhvModel::max_abs_delay() const {
  TimePs m = 0;
  for (const auto& l : lambdas) {
    for (const auto& t : l.time_a)
      if (t) m = std::max(m, std::abs(*t));
    for (const auto& t : l.time_b)
      if (t) m = std::max(m, std::abs(*t));
  }
  return m;
}

void LhvModel::validate() const {
  if (lambdas.empty()) throw ValidationError("model '" + name + "' has no hidden-variable values");
  if (total_weight() == 0) throw ValidationError("model '" + name + "' has zero total weight");
}

}  // namespace tagbell
