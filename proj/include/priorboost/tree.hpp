#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "priorboost/core.hpp"
#include "priorboost/json_util.hpp"

namespace priorboost {

struct TreeParams {
  int max_depth = 3;
  int min_samples_leaf = 2;

  void validate() const;
  friend bool operator==(const TreeParams&, const TreeParams&) = default;
};

void to_json(json& j, const TreeParams& p);
void from_json(const json& j, TreeParams& p);

// CART regression tree grown greedily on variance reduction.
//
// Split thresholds sit at midpoints between consecutive distinct feature
// values; x[f] <= threshold routes left. Leaves hold the mean of the training
// responses routed to them. Growth stops at max_depth, when a child would get
// fewer than min_samples_leaf rows, or when no split reduces the squared error.
class RegressionTree {
 public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;

    bool is_leaf() const { return feature < 0; }
    friend bool operator==(const Node&, const Node&) = default;
  };

  // Requires rows(x) == r.size() >= 2 * min_samples_leaf.
  static RegressionTree fit(const Matrix& x, std::span<const double> r, const TreeParams& params);

  double predict(std::span<const double> x) const;

  const std::vector<Node>& nodes() const { return nodes_; }
  std::size_t n_features() const { return n_features_; }
  int depth() const;

  json to_json() const;
  static RegressionTree from_json(const json& j);

 private:
  std::vector<Node> nodes_;
  std::size_t n_features_ = 0;
};

}  // namespace priorboost
