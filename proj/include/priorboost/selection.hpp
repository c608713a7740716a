#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "priorboost/boosting.hpp"
#include "priorboost/core.hpp"
#include "priorboost/folds.hpp"
#include "priorboost/json_util.hpp"

namespace priorboost {

using Predictor = std::function<double(std::span<const double>)>;
using FitProcedure = std::function<Predictor(const TargetSlice&)>;

// A FitProcedure that runs base_boost with fixed params.
FitProcedure boost_fit_procedure(BoostParams params);

struct CrossValidation {
  std::vector<double> fold_errors;
  double cv_error = 0.0;
  // Predictions on fold f's withheld rows, in the order of plan.rows_in(f).
  std::vector<std::vector<double>> fold_predictions;
};

// Fits on the complement of each fold and averages `loss` on the fold. A fit
// failure is rethrown naming the fold.
CrossValidation cross_validate(const TargetSlice& slice, const FitProcedure& fit, const FoldPlan& plan, Loss loss,
                               int jobs = 1);

struct GridAxis {
  std::string name;
  std::vector<json> values;
};

// Cartesian product of named axes; the last axis varies fastest.
struct Grid {
  std::vector<GridAxis> axes;
  std::size_t max_size = 512;

  std::size_t size() const;
  // {"axis name": value, ...} for configuration `index`.
  json config(std::size_t index) const;
  void validate() const;
};

// {"axes": [{"name": ..., "values": [...]}, ...], "max_size": 512}
void to_json(json& j, const Grid& g);
void from_json(const json& j, Grid& g);

// Overrides fields of `base` with a grid configuration. Recognised names:
// n_stages, learning_rate, l1_penalty, loss, line_search_loss, weak_learner,
// max_depth, min_samples_leaf (the last two switch to a tree learner).
BoostParams apply_config(BoostParams base, const json& config);

struct NestedCvOptions {
  int outer_k = 5;
  int inner_l = 3;
  Loss loss{LossKind::absolute};
  std::uint64_t seed = 0;
  int jobs = 1;
};

std::uint64_t outer_fold_seed(std::uint64_t seed);
std::uint64_t inner_fold_seed(std::uint64_t seed);

struct Selection {
  std::size_t config_index = 0;
  std::vector<double> inner_cv_errors;  // one per grid configuration
};

// Inner loop on one outer-training subset: l-fold CV of every configuration,
// minimum error wins, ties go to the earlier configuration. Depends only on
// `train` and the options, never on rows outside it.
Selection select_config(const TargetSlice& train, const BoostParams& base, const Grid& grid,
                        const NestedCvOptions& options);

struct OuterFold {
  std::size_t config_index = 0;
  json chosen_config;
  std::vector<double> inner_cv_errors;
  double fold_error = 0.0;
  std::vector<std::size_t> withheld_rows;
};

struct NestedCvReport {
  double outer_error_estimate = 0.0;
  std::vector<OuterFold> folds;
};

void to_json(json& j, const NestedCvReport& r);

// Outer k-fold loop around select_config; the chosen configuration is refitted
// with base_boost on the outer-training rows and scored on the withheld fold.
NestedCvReport nested_cv(const TargetSlice& slice, const BoostParams& base, const Grid& grid,
                         const NestedCvOptions& options);

struct LearningCurvePoint {
  std::size_t train_size = 0;
  double train_error = 0.0;
  double cv_error = 0.0;
  double incumbent_error = 0.0;
};

void to_json(json& j, const LearningCurvePoint& p);

struct LearningCurveOptions {
  std::vector<std::size_t> sizes;  // strictly increasing
  int k_folds = 5;
  Loss loss{LossKind::absolute};
  int repeats = 5;
  std::uint64_t seed = 0;
  int jobs = 1;
};

// Rows drawn for one repeat at one size: the first `size` entries of a seeded
// permutation, sorted ascending. Subsets are nested across sizes.
std::vector<std::size_t> curve_subset(std::size_t m, std::size_t size, int repeat, std::uint64_t seed);

// For every size: the modified cross-validation of base_boost_cv (candidate
// and incumbent errors) plus the candidate's training error on the subset,
// averaged over repeats. At size == m every repeat sees the same rows, so a
// single evaluation is used.
std::vector<LearningCurvePoint> learning_curve(const TargetSlice& slice, const BoostParams& params,
                                               const LearningCurveOptions& options);

}  // namespace priorboost
