#include "priorboost/explain.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "priorboost/errors.hpp"
#include "priorboost/parallel.hpp"
#include "priorboost/rng.hpp"

namespace priorboost {

namespace {

void check_inputs(std::span<const double> x, const Matrix& background) {
  if (x.empty()) throw ValidationError("shapley: no features");
  if (background.rows() < 1) throw ValidationError("shapley: background set is empty");
  if (static_cast<std::size_t>(background.cols()) != x.size()) {
    throw ValidationError("shapley: background has " + std::to_string(background.cols()) + " columns, x has " +
                          std::to_string(x.size()));
  }
  for (double v : x) {
    if (!std::isfinite(v)) throw ValidationError("shapley: non-finite feature value");
  }
}

}  // namespace

void to_json(json& j, const Attribution& a) {
  j = json{{"example_id", a.example_id}, {"base_value", a.base_value}, {"prediction", a.prediction},
           {"phis", a.phis},             {"adjusted", a.adjusted}};
  if (!a.standard_errors.empty()) j["standard_errors"] = a.standard_errors;
}

Attribution shapley_exact(const Model& model, std::span<const double> x, const Matrix& background,
                          std::size_t max_features, int jobs) {
  check_inputs(x, background);
  const std::size_t m = x.size();
  if (m > max_features) {
    throw ValidationError("shapley: " + std::to_string(m) + " features exceed the exact-mode limit of " +
                          std::to_string(max_features) + "; use sampling mode");
  }
  const std::size_t n_subsets = std::size_t{1} << m;
  const RowMatrix bg = background;
  const auto rows = bg.rows();

  std::vector<double> value(n_subsets);
  parallel_for(n_subsets, jobs, [&](std::size_t mask) {
    std::vector<double> z(m);
    double sum = 0.0;
    for (Eigen::Index r = 0; r < rows; ++r) {
      const auto b = row_of(bg, r);
      for (std::size_t k = 0; k < m; ++k) z[k] = (mask >> k) & 1U ? x[k] : b[k];
      sum += model(z);
    }
    value[mask] = sum / static_cast<double>(rows);
  });

  // weight[s] = s! (M - s - 1)! / M!
  std::vector<double> weight(m);
  for (std::size_t s = 0; s < m; ++s) {
    double w = 1.0 / static_cast<double>(m);
    for (std::size_t t = 1; t <= s; ++t) w *= static_cast<double>(t) / static_cast<double>(m - t);
    weight[s] = w;
  }

  Attribution out;
  out.base_value = value[0];
  out.prediction = model(x);
  out.phis.assign(m, 0.0);
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t bit = std::size_t{1} << k;
    double phi = 0.0;
    for (std::size_t mask = 0; mask < n_subsets; ++mask) {
      if (mask & bit) continue;
      const double diff = value[mask | bit] - value[mask];
      if (diff != 0.0) phi += weight[static_cast<std::size_t>(std::popcount(mask))] * diff;
    }
    out.phis[k] = phi;
  }
  return out;
}

Attribution shapley_sampled(const Model& model, std::span<const double> x, const Matrix& background,
                            std::size_t n_permutations, std::uint64_t seed) {
  check_inputs(x, background);
  if (n_permutations < 1) throw ValidationError("shapley: n_permutations must be at least 1");
  const std::size_t m = x.size();
  const RowMatrix bg = background;

  Attribution out;
  out.prediction = model(x);
  double base = 0.0;
  for (Eigen::Index r = 0; r < bg.rows(); ++r) base += model(row_of(bg, r));
  out.base_value = base / static_cast<double>(bg.rows());

  std::vector<double> sum(m, 0.0);
  std::vector<double> sum_sq(m, 0.0);
  Rng rng(seed);
  std::vector<double> z(m);
  for (std::size_t p = 0; p < n_permutations; ++p) {
    const auto perm = random_permutation(m, rng);
    const auto b = row_of(bg, static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(bg.rows()))));
    std::copy(b.begin(), b.end(), z.begin());
    double previous = model(z);
    for (auto k : perm) {
      z[k] = x[k];
      const double current = model(z);
      const double c = current - previous;
      sum[k] += c;
      sum_sq[k] += c * c;
      previous = current;
    }
  }

  const auto n = static_cast<double>(n_permutations);
  out.phis.resize(m);
  out.standard_errors.resize(m);
  double total = 0.0;
  double total_abs = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double mean = sum[k] / n;
    const double var = n > 1 ? std::max(0.0, (sum_sq[k] - n * mean * mean) / (n - 1)) : 0.0;
    out.phis[k] = mean;
    out.standard_errors[k] = std::sqrt(var / n);
    total += mean;
    total_abs += std::abs(mean);
  }
  const double residual = out.prediction - out.base_value - total;
  if (residual != 0.0 && total_abs > 0.0) {
    for (auto& phi : out.phis) phi += residual * std::abs(phi) / total_abs;
    out.adjusted = true;
  }
  return out;
}

Matrix subsample_background(const Matrix& data, std::size_t max_rows, std::uint64_t seed) {
  if (max_rows < 1) throw ValidationError("background: max_rows must be at least 1");
  const auto m = static_cast<std::size_t>(data.rows());
  if (m <= max_rows) return data;
  Rng rng(seed);
  auto perm = random_permutation(m, rng);
  perm.resize(max_rows);
  std::sort(perm.begin(), perm.end());
  Matrix out(static_cast<Eigen::Index>(max_rows), data.cols());
  for (std::size_t i = 0; i < max_rows; ++i) out.row(static_cast<Eigen::Index>(i)) = data.row(static_cast<Eigen::Index>(perm[i]));
  return out;
}

void to_json(json& j, const ImportanceReport& r) {
  json ranked = json::array();
  for (auto k : r.order) ranked.push_back(json{{"feature", r.feature_names[k]}, {"importance", r.importances[k]}});
  j = json{{"feature_names", r.feature_names},
           {"importances", r.importances},
           {"order_ascending", r.order},
           {"ranked_ascending", std::move(ranked)}};
}

AttributionSummary summary_data(const std::vector<Attribution>& attributions, const Matrix& features,
                                const std::vector<std::string>& feature_names) {
  const std::size_t m = feature_names.size();
  if (static_cast<std::size_t>(features.cols()) != m) {
    throw ValidationError("summary: feature matrix has " + std::to_string(features.cols()) + " columns, " +
                          std::to_string(m) + " names given");
  }
  AttributionSummary out;
  out.importance.feature_names = feature_names;
  out.importance.importances.assign(m, 0.0);
  for (const auto& a : attributions) {
    if (a.phis.size() != m) throw ValidationError("summary: attributions disagree on the number of features");
    if (a.example_id >= static_cast<std::size_t>(features.rows())) {
      throw ValidationError("summary: example id " + std::to_string(a.example_id) + " out of range");
    }
    for (std::size_t k = 0; k < m; ++k) out.importance.importances[k] += std::abs(a.phis[k]);
  }
  auto& order = out.importance.order;
  order.resize(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return out.importance.importances[a] < out.importance.importances[b];
  });

  std::vector<std::size_t> by_example(attributions.size());
  std::iota(by_example.begin(), by_example.end(), std::size_t{0});
  std::stable_sort(by_example.begin(), by_example.end(), [&](std::size_t a, std::size_t b) {
    return attributions[a].example_id < attributions[b].example_id;
  });
  for (auto k : order) {
    for (auto i : by_example) {
      const auto& a = attributions[i];
      out.records.push_back(AttributionRecord{
          a.example_id, feature_names[k], a.phis[k],
          features(static_cast<Eigen::Index>(a.example_id), static_cast<Eigen::Index>(k))});
    }
  }
  return out;
}

}  // namespace priorboost
