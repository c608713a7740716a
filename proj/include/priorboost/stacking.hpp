#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "priorboost/core.hpp"
#include "priorboost/json_util.hpp"
#include "priorboost/linear.hpp"
#include "priorboost/tree.hpp"

namespace priorboost {

enum class BaseLearnerKind { linear, tree, nearest_neighbor };

struct BaseLearnerSpec {
  BaseLearnerKind kind = BaseLearnerKind::linear;
  TreeParams tree;  // used when kind == tree

  friend bool operator==(const BaseLearnerSpec&, const BaseLearnerSpec&) = default;
};

struct StackingParams {
  std::vector<BaseLearnerSpec> base_learners = {BaseLearnerSpec{BaseLearnerKind::linear, {}},
                                                BaseLearnerSpec{BaseLearnerKind::tree, {}}};
  int oof_folds = 5;

  void validate() const;
  friend bool operator==(const StackingParams&, const StackingParams&) = default;
};

void to_json(json& j, const BaseLearnerSpec& s);
void from_json(const json& j, BaseLearnerSpec& s);
void to_json(json& j, const StackingParams& p);
void from_json(const json& j, StackingParams& p);

using BaseLearner = std::variant<LinearModel, RegressionTree, NearestNeighbor>;

BaseLearner fit_base_learner(const BaseLearnerSpec& spec, const Matrix& x, std::span<const double> r);
double predict_base_learner(const BaseLearner& learner, std::span<const double> x);

// Out-of-fold predictions: column b holds, for every row, the prediction of
// base learner b fitted without that row's fold.
Matrix out_of_fold_predictions(const Matrix& x, std::span<const double> r,
                               const StackingParams& params, std::uint64_t seed);

// Two-layer ensemble: base learners refitted on all rows, combined by a linear
// meta learner fitted only on out-of-fold base predictions.
class StackingRegressor {
 public:
  // Requires rows >= oof_folds. A singular meta system falls back to ridge
  // regression with lambda = 1e-8 and sets meta_regularized().
  static StackingRegressor fit(const Matrix& x, std::span<const double> r,
                               const StackingParams& params, std::uint64_t seed);

  double predict(std::span<const double> x) const;

  const std::vector<BaseLearner>& base_learners() const { return bases_; }
  // Length = number of base learners; the meta intercept is separate.
  const Vector& meta_coefficients() const { return meta_coef_; }
  double meta_intercept() const { return meta_intercept_; }
  bool meta_regularized() const { return meta_regularized_; }

  json to_json() const;
  static StackingRegressor from_json(const json& j);

 private:
  std::vector<BaseLearner> bases_;
  Vector meta_coef_;
  double meta_intercept_ = 0.0;
  bool meta_regularized_ = false;
};

}  // namespace priorboost
