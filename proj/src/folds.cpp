#include "priorboost/folds.hpp"

#include <string>

#include "priorboost/errors.hpp"
#include "priorboost/rng.hpp"

namespace priorboost {

std::vector<std::size_t> FoldPlan::rows_in(int fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] == fold) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FoldPlan::rows_not_in(int fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] != fold) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FoldPlan::sizes() const {
  std::vector<std::size_t> out(static_cast<std::size_t>(k), 0);
  for (int a : assignments) ++out[static_cast<std::size_t>(a)];
  return out;
}

FoldPlan make_folds(std::size_t m, int k, std::uint64_t seed) {
  if (k < 2) throw ValidationError("folds: k must be at least 2");
  if (static_cast<std::size_t>(k) > m) {
    throw ValidationError("folds: k = " + std::to_string(k) + " exceeds the " + std::to_string(m) +
                          " available rows");
  }
  Rng rng(seed);
  const auto perm = random_permutation(m, rng);
  FoldPlan plan{k, std::vector<int>(m, 0), seed};
  const std::size_t base = m / static_cast<std::size_t>(k);
  const std::size_t extra = m % static_cast<std::size_t>(k);
  std::size_t pos = 0;
  for (int f = 0; f < k; ++f) {
    const std::size_t size = base + (static_cast<std::size_t>(f) < extra ? 1 : 0);
    for (std::size_t i = 0; i < size; ++i) plan.assignments[perm[pos++]] = f;
  }
  return plan;
}

}  // namespace priorboost
