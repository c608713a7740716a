#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "priorboost/core.hpp"
#include "priorboost/json_util.hpp"
#include "priorboost/weak_learner.hpp"

namespace priorboost {

struct BoostParams {
  int n_stages = 100;
  Loss loss{LossKind::absolute};              // drives the pseudo-residuals
  Loss line_search_loss{LossKind::absolute};  // drives the stage coefficient
  double l1_penalty = 0.0;
  double learning_rate = 0.1;  // 1.0 reproduces the unshrunk stagewise update
  WeakLearnerSpec weak_learner = TreeParams{};
  std::uint64_t seed = 0;

  void validate() const;
};

void to_json(json& j, const BoostParams& p);
void from_json(const json& j, BoostParams& p);

struct Stage {
  double alpha = 0.0;
  WeakLearner learner;
};

// h(x) = x[target_index] + sum_k alpha_k * b_k(x).
//
// The first term is the prior prediction carried in the example itself, not a
// fitted constant. A model with no stages is the identity prior ("incumbent").
class AdditiveExpansion {
 public:
  AdditiveExpansion(std::size_t target_index, std::size_t n_features, BoostParams params);

  static AdditiveExpansion identity_prior(std::size_t target_index, std::size_t n_features,
                                          BoostParams params = {});

  double predict(std::span<const double> x) const;
  Vector predict(const Matrix& x) const;

  void append(Stage stage) { stages_.push_back(std::move(stage)); }

  std::size_t target_index() const { return target_index_; }
  std::size_t n_features() const { return n_features_; }
  const BoostParams& params() const { return params_; }
  const std::vector<Stage>& stages() const { return stages_; }
  bool is_identity_prior() const { return stages_.empty(); }

  json to_json() const;
  static AdditiveExpansion from_json(const json& j);

 private:
  std::size_t target_index_;
  std::size_t n_features_;
  BoostParams params_;
  std::vector<Stage> stages_;
};

struct BoostResult {
  AdditiveExpansion model;
  // Sum of line_search_loss over the training rows after each stage; entry 0
  // is the prior alone.
  std::vector<double> training_objective;
  // Set when every pseudo-residual vanished before n_stages were fitted.
  bool early_stopped = false;
};

// Minimizes g(a) = sum_i loss(y_i, h_i + a * b_i) + l1 * |a|.
//
// Squared loss is solved in closed form with soft thresholding. The absolute
// loss makes g convex and piecewise linear, so the minimum is attained at one
// of the breakpoints (y_i - h_i) / b_i or at 0; each candidate is evaluated
// exactly and near-ties (1e-12 relative) go to the smallest |a|. Returns 0
// when every b_i is zero.
double line_search(std::span<const double> h_prev, std::span<const double> b_vals,
                   std::span<const double> y, Loss loss, double l1_penalty);

// Greedy stagewise fitting initialized at the prior feature. Each stage fits
// the weak learner to the pseudo-residuals, line-searches its coefficient,
// scales it by the learning rate and appends it. The weak learner of stage k
// is seeded with derive_seed(params.seed, k).
BoostResult base_boost(const TargetSlice& slice, const BoostParams& params);

// Continues `partial` (fitted on the same slice with the same params) until it
// has params.n_stages stages. Produces the same model as an uninterrupted run.
BoostResult resume_boost(const TargetSlice& slice, AdditiveExpansion partial);

struct CvReport {
  std::vector<double> fold_errors_candidate;
  std::vector<double> fold_errors_incumbent;
  double cv_error = 0.0;
  double incumbent_error = 0.0;
  bool chose_incumbent = false;
};

void to_json(json& j, const CvReport& r);
void from_json(const json& j, CvReport& r);

// Modified k-fold cross-validation: per fold, fit the candidate booster on the
// other folds and score both it and the incumbent (which predicts the prior
// feature) on the withheld fold. Folds come from make_folds with a seed derived
// from params.seed. Folds are evaluated on up to `jobs` threads.
CvReport modified_cross_validation(const TargetSlice& slice, const BoostParams& params, int k_folds,
                                   Loss cv_loss, int jobs = 1);

struct BoostCvResult {
  AdditiveExpansion model;
  CvReport report;
};

// Keeps the incumbent when incumbent_error <= cv_error; otherwise refits the
// booster on all rows.
BoostCvResult base_boost_cv(const TargetSlice& slice, const BoostParams& params, int k_folds = 5,
                            Loss cv_loss = {}, int jobs = 1);

// Seed of the fold plan used by modified_cross_validation.
std::uint64_t cv_fold_seed(const BoostParams& params);

}  // namespace priorboost
