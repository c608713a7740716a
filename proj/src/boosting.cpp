#include "priorboost/boosting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "priorboost/errors.hpp"
#include "priorboost/folds.hpp"
#include "priorboost/log.hpp"
#include "priorboost/parallel.hpp"
#include "priorboost/rng.hpp"

namespace priorboost {

namespace {

constexpr int kSchemaVersion = 1;
constexpr std::uint64_t kCvFoldStream = 0x6b666f6c64ULL;
constexpr double kZeroResidual = 1e-12;

double penalized_objective(std::span<const double> h, std::span<const double> b,
                           std::span<const double> y, Loss loss, double l1, double alpha) {
  double sum = 0.0;
  if (loss.kind == LossKind::absolute) {
    for (std::size_t i = 0; i < y.size(); ++i) sum += std::abs(y[i] - (h[i] + alpha * b[i]));
  } else {
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double d = y[i] - (h[i] + alpha * b[i]);
      sum += d * d;
    }
  }
  return sum + l1 * std::abs(alpha);
}

double training_objective(const Vector& y, const Vector& h, Loss loss) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) sum += loss_value(loss, y(i), h(i));
  return sum;
}

double absolute_line_search(std::span<const double> h, std::span<const double> b,
                            std::span<const double> y, double l1) {
  std::vector<double> candidates{0.0};
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (b[i] != 0.0) candidates.push_back((y[i] - h[i]) / b[i]);
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  std::vector<double> values(candidates.size());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    values[c] = penalized_objective(h, b, y, Loss{LossKind::absolute}, l1, candidates[c]);
    best = std::min(best, values[c]);
  }
  // A flat stretch of g has equal values at its end breakpoints; rounding can
  // separate them, hence the relative tolerance.
  const double tol = 1e-12 * std::max(1.0, std::abs(best));
  double chosen = 0.0;
  double chosen_abs = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    if (values[c] <= best + tol && std::abs(candidates[c]) < chosen_abs) {
      chosen = candidates[c];
      chosen_abs = std::abs(candidates[c]);
    }
  }
  return chosen;
}

void check_lengths(std::span<const double> h, std::span<const double> b, std::span<const double> y) {
  if (h.size() != b.size() || h.size() != y.size()) {
    throw ValidationError("line_search: inputs must have equal length");
  }
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!std::isfinite(h[i]) || !std::isfinite(b[i]) || !std::isfinite(y[i])) {
      throw ValidationError("line_search: non-finite input");
    }
  }
}

BoostResult boost_from(const TargetSlice& slice, AdditiveExpansion model, Vector h) {
  const BoostParams params = model.params();
  const auto m = static_cast<Eigen::Index>(slice.rows());
  const RowMatrix rows = slice.examples;
  const Vector& y = slice.target;
  const auto y_span = as_span(y);

  BoostResult result{std::move(model), {}, false};
  result.training_objective.push_back(training_objective(y, h, params.line_search_loss));

  std::vector<double> residuals(static_cast<std::size_t>(m));
  Vector b(m);
  for (auto k = static_cast<int>(result.model.stages().size()) + 1; k <= params.n_stages; ++k) {
    double largest = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      const double r = negative_gradient(params.loss, y(i), h(i));
      residuals[static_cast<std::size_t>(i)] = r;
      largest = std::max(largest, std::abs(r));
    }
    if (largest < kZeroResidual) {
      result.early_stopped = true;
      log::info("boost: target " + std::to_string(slice.target_index) +
                ": pseudo-residuals vanished at stage " + std::to_string(k) + ", stopping early");
      break;
    }

    auto learner = [&] {
      try {
        return fit_weak_learner(params.weak_learner, slice.examples, residuals,
                                derive_seed(params.seed, static_cast<std::uint64_t>(k)));
      } catch (const ValidationError& e) {
        throw ValidationError("boost: weak learner failed at stage " + std::to_string(k) + ": " + e.what());
      } catch (const NumericalError& e) {
        throw NumericalError("boost: weak learner failed at stage " + std::to_string(k) + ": " + e.what());
      }
    }();
    for (Eigen::Index i = 0; i < m; ++i) b(i) = learner.predict(row_of(rows, i));

    const double step = line_search(as_span(h), as_span(b), y_span, params.line_search_loss, params.l1_penalty);
    const double alpha = params.learning_rate * step;
    for (Eigen::Index i = 0; i < m; ++i) h(i) = h(i) + alpha * b(i);
    result.model.append(Stage{alpha, std::move(learner)});
    result.training_objective.push_back(training_objective(y, h, params.line_search_loss));
  }
  return result;
}

double mean_loss(const Vector& y, const Vector& p, Loss loss) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) sum += loss_value(loss, y(i), p(i));
  return sum / static_cast<double>(y.size());
}

}  // namespace

void BoostParams::validate() const {
  if (n_stages < 1) throw ValidationError("boost: n_stages must be at least 1");
  if (!(l1_penalty >= 0.0) || !std::isfinite(l1_penalty)) {
    throw ValidationError("boost: l1_penalty must be a finite value >= 0");
  }
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) {
    throw ValidationError("boost: learning_rate must lie in (0, 1]");
  }
  std::visit(
      [](const auto& p) {
        if constexpr (requires { p.validate(); }) p.validate();
      },
      weak_learner);
}

void to_json(json& j, const BoostParams& p) {
  json learner;
  weak_learner_spec_to_json(learner, p.weak_learner);
  j = json{{"n_stages", p.n_stages},
           {"loss", to_string(p.loss.kind)},
           {"line_search_loss", to_string(p.line_search_loss.kind)},
           {"l1_penalty", p.l1_penalty},
           {"learning_rate", p.learning_rate},
           {"weak_learner", learner},
           {"seed", p.seed}};
}

void from_json(const json& j, BoostParams& p) {
  constexpr std::string_view ctx = "boost params";
  check_keys(j, {"n_stages", "loss", "line_search_loss", "l1_penalty", "learning_rate", "weak_learner", "seed"},
             ctx);
  read_optional(j, "n_stages", p.n_stages, ctx);
  if (auto it = j.find("loss"); it != j.end()) p.loss.kind = loss_kind_from_string(it->get<std::string>());
  if (auto it = j.find("line_search_loss"); it != j.end()) {
    p.line_search_loss.kind = loss_kind_from_string(it->get<std::string>());
  }
  read_optional(j, "l1_penalty", p.l1_penalty, ctx);
  read_optional(j, "learning_rate", p.learning_rate, ctx);
  if (auto it = j.find("weak_learner"); it != j.end()) p.weak_learner = weak_learner_spec_from_json(*it);
  read_optional(j, "seed", p.seed, ctx);
  p.validate();
}

AdditiveExpansion::AdditiveExpansion(std::size_t target_index, std::size_t n_features, BoostParams params)
    : target_index_(target_index), n_features_(n_features), params_(std::move(params)) {
  if (target_index_ >= n_features_) throw ValidationError("expansion: target index out of range");
}

AdditiveExpansion AdditiveExpansion::identity_prior(std::size_t target_index, std::size_t n_features,
                                                    BoostParams params) {
  return AdditiveExpansion(target_index, n_features, std::move(params));
}

double AdditiveExpansion::predict(std::span<const double> x) const {
  if (x.size() != n_features_) {
    throw ValidationError("expansion: expected " + std::to_string(n_features_) + " features, got " +
                          std::to_string(x.size()));
  }
  double sum = x[target_index_];
  for (const auto& stage : stages_) sum = sum + stage.alpha * stage.learner.predict(x);
  return sum;
}

Vector AdditiveExpansion::predict(const Matrix& x) const {
  const RowMatrix rows = x;
  Vector out(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) out(i) = predict(row_of(rows, i));
  return out;
}

json AdditiveExpansion::to_json() const {
  json stages = json::array();
  for (const auto& s : stages_) stages.push_back(json{{"alpha", s.alpha}, {"learner", s.learner.to_json()}});
  return json{{"schema_version", kSchemaVersion},
              {"target_index", target_index_},
              {"n_features", n_features_},
              {"params", params_},
              {"stages", std::move(stages)}};
}

AdditiveExpansion AdditiveExpansion::from_json(const json& j) {
  check_keys(j, {"schema_version", "target_index", "n_features", "params", "stages"}, "model");
  if (j.at("schema_version").get<int>() != kSchemaVersion) {
    throw ValidationError("model: unsupported schema_version");
  }
  AdditiveExpansion model(j.at("target_index").get<std::size_t>(), j.at("n_features").get<std::size_t>(),
                          j.at("params").get<BoostParams>());
  for (const auto& s : j.at("stages")) {
    check_keys(s, {"alpha", "learner"}, "stage");
    model.append(Stage{s.at("alpha").get<double>(), WeakLearner::from_json(s.at("learner"))});
  }
  return model;
}

double line_search(std::span<const double> h_prev, std::span<const double> b_vals,
                   std::span<const double> y, Loss loss, double l1_penalty) {
  check_lengths(h_prev, b_vals, y);
  if (!(l1_penalty >= 0.0)) throw ValidationError("line_search: l1 penalty must be >= 0");
  if (std::all_of(b_vals.begin(), b_vals.end(), [](double v) { return v == 0.0; })) return 0.0;

  double alpha = 0.0;
  if (loss.kind == LossKind::squared) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      num += b_vals[i] * (y[i] - h_prev[i]);
      den += b_vals[i] * b_vals[i];
    }
    const double shrunk = std::max(std::abs(num) - 0.5 * l1_penalty, 0.0);
    alpha = std::copysign(shrunk, num) / den;
  } else {
    alpha = absolute_line_search(h_prev, b_vals, y, l1_penalty);
  }
  // alpha = 0 is always feasible; never return a step that rounds worse.
  if (alpha != 0.0 && penalized_objective(h_prev, b_vals, y, loss, l1_penalty, alpha) >
                          penalized_objective(h_prev, b_vals, y, loss, l1_penalty, 0.0)) {
    return 0.0;
  }
  return alpha;
}

BoostResult base_boost(const TargetSlice& slice, const BoostParams& params) {
  slice.validate();
  params.validate();
  if (slice.rows() < 4) {
    throw ValidationError("boost: need at least 4 training rows, got " + std::to_string(slice.rows()));
  }
  AdditiveExpansion model(slice.target_index, slice.n_features(), params);
  return boost_from(slice, std::move(model), slice.prior());
}

BoostResult resume_boost(const TargetSlice& slice, AdditiveExpansion partial) {
  slice.validate();
  if (partial.target_index() != slice.target_index || partial.n_features() != slice.n_features()) {
    throw ValidationError("boost: partial model does not match the slice");
  }
  Vector h = partial.predict(slice.examples);
  return boost_from(slice, std::move(partial), std::move(h));
}

std::uint64_t cv_fold_seed(const BoostParams& params) { return derive_seed(params.seed, kCvFoldStream); }

void to_json(json& j, const CvReport& r) {
  j = json{{"fold_errors_candidate", r.fold_errors_candidate},
           {"fold_errors_incumbent", r.fold_errors_incumbent},
           {"cv_error", r.cv_error},
           {"incumbent_error", r.incumbent_error},
           {"chose_incumbent", r.chose_incumbent}};
}

void from_json(const json& j, CvReport& r) {
  check_keys(j, {"fold_errors_candidate", "fold_errors_incumbent", "cv_error", "incumbent_error", "chose_incumbent"},
             "cv report");
  r.fold_errors_candidate = j.at("fold_errors_candidate").get<std::vector<double>>();
  r.fold_errors_incumbent = j.at("fold_errors_incumbent").get<std::vector<double>>();
  r.cv_error = j.at("cv_error").get<double>();
  r.incumbent_error = j.at("incumbent_error").get<double>();
  r.chose_incumbent = j.at("chose_incumbent").get<bool>();
}

CvReport modified_cross_validation(const TargetSlice& slice, const BoostParams& params, int k_folds,
                                   Loss cv_loss, int jobs) {
  slice.validate();
  params.validate();
  if (k_folds < 2 || static_cast<std::size_t>(k_folds) > slice.rows()) {
    throw ValidationError("cv: k_folds must lie in [2, " + std::to_string(slice.rows()) + "]");
  }
  const FoldPlan plan = make_folds(slice.rows(), k_folds, cv_fold_seed(params));
  for (auto size : plan.sizes()) {
    if (size < 2) throw ValidationError("too few rows per fold");
  }

  const auto k = static_cast<std::size_t>(k_folds);
  CvReport report;
  report.fold_errors_candidate.assign(k, 0.0);
  report.fold_errors_incumbent.assign(k, 0.0);
  parallel_for(k, jobs, [&](std::size_t f) {
    const auto fold = static_cast<int>(f);
    const TargetSlice train = slice.subset(plan.rows_not_in(fold));
    const TargetSlice held = slice.subset(plan.rows_in(fold));
    const auto candidate = base_boost(train, params).model;
    report.fold_errors_candidate[f] = mean_loss(held.target, candidate.predict(held.examples), cv_loss);
    report.fold_errors_incumbent[f] = mean_loss(held.target, held.prior(), cv_loss);
  });

  double cand = 0.0;
  double inc = 0.0;
  for (std::size_t f = 0; f < k; ++f) {
    cand += report.fold_errors_candidate[f];
    inc += report.fold_errors_incumbent[f];
  }
  report.cv_error = cand / static_cast<double>(k);
  report.incumbent_error = inc / static_cast<double>(k);
  report.chose_incumbent = report.incumbent_error <= report.cv_error;
  return report;
}

BoostCvResult base_boost_cv(const TargetSlice& slice, const BoostParams& params, int k_folds, Loss cv_loss,
                            int jobs) {
  CvReport report = modified_cross_validation(slice, params, k_folds, cv_loss, jobs);
  if (report.chose_incumbent) {
    return {AdditiveExpansion::identity_prior(slice.target_index, slice.n_features(), params), std::move(report)};
  }
  return {base_boost(slice, params).model, std::move(report)};
}

}  // namespace priorboost
