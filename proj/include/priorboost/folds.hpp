#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace priorboost {

// Assignment of m rows to k non-overlapping folds.
struct FoldPlan {
  int k = 0;
  std::vector<int> assignments;  // fold id in [0, k) for each row
  std::uint64_t seed = 0;

  std::size_t rows() const { return assignments.size(); }
  // Row indices in fold f, ascending.
  std::vector<std::size_t> rows_in(int fold) const;
  // Row indices outside fold f, ascending.
  std::vector<std::size_t> rows_not_in(int fold) const;
  std::vector<std::size_t> sizes() const;
};

// Seeded shuffle of 0..m-1 cut into k contiguous blocks; the first m % k
// folds receive one extra row. Requires 2 <= k <= m.
FoldPlan make_folds(std::size_t m, int k, std::uint64_t seed);

}  // namespace priorboost
