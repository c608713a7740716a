#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "priorboost/core.hpp"
#include "priorboost/json_util.hpp"

namespace priorboost {

// Anything that maps a feature vector to a real prediction.
using Model = std::function<double(std::span<const double>)>;

struct Attribution {
  double base_value = 0.0;           // v(empty set): mean prediction over the background
  std::vector<double> phis;          // one Shapley value per feature
  std::size_t example_id = 0;
  double prediction = 0.0;           // model(x)
  bool adjusted = false;             // sampled mode: residual redistributed for local accuracy
  std::vector<double> standard_errors;  // sampled mode only
};

void to_json(json& j, const Attribution& a);

// Exact interventional Shapley values by enumerating all 2^M coalitions:
// v(S) = mean over background rows b of model(x on S, b elsewhere). Throws
// ValidationError when M > max_features; use shapley_sampled instead.
Attribution shapley_exact(const Model& model, std::span<const double> x, const Matrix& background,
                          std::size_t max_features = 15, int jobs = 1);

// Permutation-sampling estimate. Each sample draws a feature permutation and a
// background row. The gap to the exact local-accuracy identity is spread over
// the features in proportion to |phi_k| and the result is flagged adjusted.
Attribution shapley_sampled(const Model& model, std::span<const double> x, const Matrix& background,
                            std::size_t n_permutations, std::uint64_t seed);

// At most max_rows rows of `data` (seeded, original order kept).
Matrix subsample_background(const Matrix& data, std::size_t max_rows, std::uint64_t seed);

struct ImportanceReport {
  std::vector<std::string> feature_names;
  std::vector<double> importances;  // sum over examples of |phi_k|
  std::vector<std::size_t> order;   // feature indices, ascending importance
};

void to_json(json& j, const ImportanceReport& r);

struct AttributionRecord {
  std::size_t example_id = 0;
  std::string feature;
  double shap_value = 0.0;
  double feature_value = 0.0;
};

struct AttributionSummary {
  ImportanceReport importance;
  // Grouped by feature in importance order, then by example id.
  std::vector<AttributionRecord> records;
};

// `features` holds the explained feature vectors; row example_id of it is the
// input of each attribution.
AttributionSummary summary_data(const std::vector<Attribution>& attributions, const Matrix& features,
                                const std::vector<std::string>& feature_names);

}  // namespace priorboost
