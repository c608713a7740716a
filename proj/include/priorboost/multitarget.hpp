#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "priorboost/boosting.hpp"
#include "priorboost/core.hpp"
#include "priorboost/json_util.hpp"

namespace priorboost {

// n independent single-target regressors, one per target index, concatenated.
struct MultiTargetModel {
  std::vector<AdditiveExpansion> models;
  std::vector<CvReport> reports;
  std::vector<std::string> feature_names;
  std::vector<std::string> target_names;
  std::uint64_t training_fingerprint = 0;

  std::size_t n_targets() const { return models.size(); }

  Vector predict(std::span<const double> x) const;
  // Row-wise, order preserving.
  Matrix predict(const Matrix& x) const;

  json to_json() const;
  static MultiTargetModel from_json(const json& j);
};

struct FitMultiOptions {
  BoostParams shared;
  // Per-target overrides (0-based target index); they replace `shared`.
  std::map<std::size_t, BoostParams> per_target;
  int k_folds = 5;
  Loss cv_loss{LossKind::absolute};
  std::uint64_t master_seed = 0;
  int jobs = 1;
};

// Seed used for target j; independent of the order in which targets run.
std::uint64_t target_seed(std::uint64_t master_seed, std::size_t j);

// Runs base_boost_cv on every slice. Failures are collected and rethrown as a
// single error naming every failed target.
MultiTargetModel fit_multi(const Dataset& train, const FitMultiOptions& options);

struct MultiEvaluation {
  std::vector<double> per_target_mae;
  double average_mae = 0.0;
  std::vector<double> baseline_per_target_mae;
  double baseline_average_mae = 0.0;
  double improvement_pct = 0.0;
  bool on_training_data = false;
};

void to_json(json& j, const MultiEvaluation& e);

// Test-set evaluation against the identity-prior baseline. Refuses a dataset
// whose fingerprint matches the data the model was fitted on.
MultiEvaluation evaluate_multi(const MultiTargetModel& model, const Dataset& test);

// Resubstitution metrics on the training data, labeled as such.
MultiEvaluation evaluate_multi_on_training(const MultiTargetModel& model, const Dataset& train);

}  // namespace priorboost
