#include "priorboost/selection.hpp"

#include <algorithm>
#include <exception>
#include <memory>
#include <string>

#include "priorboost/errors.hpp"
#include "priorboost/parallel.hpp"
#include "priorboost/rng.hpp"

namespace priorboost {

namespace {

constexpr std::uint64_t kOuterStream = 0x6f75746572ULL;
constexpr std::uint64_t kInnerStream = 0x696e6e6572ULL;
constexpr std::uint64_t kCurveStream = 0x6375727665ULL;

double mean(const std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

double mean_loss(const Vector& y, const Vector& p, Loss loss) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) sum += loss_value(loss, y(i), p(i));
  return sum / static_cast<double>(y.size());
}

Loss loss_from_json(const json& v) { return Loss{loss_kind_from_string(v.get<std::string>())}; }

}  // namespace

FitProcedure boost_fit_procedure(BoostParams params) {
  return [params = std::move(params)](const TargetSlice& train) -> Predictor {
    auto model = std::make_shared<AdditiveExpansion>(base_boost(train, params).model);
    return [model](std::span<const double> x) { return model->predict(x); };
  };
}

CrossValidation cross_validate(const TargetSlice& slice, const FitProcedure& fit, const FoldPlan& plan, Loss loss,
                               int jobs) {
  slice.validate();
  if (plan.rows() != slice.rows()) throw ValidationError("cross_validate: fold plan does not match the slice");
  const auto k = static_cast<std::size_t>(plan.k);
  CrossValidation out;
  out.fold_errors.assign(k, 0.0);
  out.fold_predictions.assign(k, {});
  const RowMatrix rows = slice.examples;

  parallel_for(k, jobs, [&](std::size_t f) {
    const auto fold = static_cast<int>(f);
    const auto held = plan.rows_in(fold);
    Predictor predictor;
    try {
      predictor = fit(slice.subset(plan.rows_not_in(fold)));
    } catch (const NumericalError& e) {
      throw NumericalError("cross_validate: fold " + std::to_string(f) + ": " + e.what());
    } catch (const std::exception& e) {
      throw ValidationError("cross_validate: fold " + std::to_string(f) + ": " + e.what());
    }
    double sum = 0.0;
    auto& preds = out.fold_predictions[f];
    for (auto i : held) {
      const double p = predictor(row_of(rows, static_cast<Eigen::Index>(i)));
      preds.push_back(p);
      sum += loss_value(loss, slice.target(static_cast<Eigen::Index>(i)), p);
    }
    out.fold_errors[f] = sum / static_cast<double>(held.size());
  });
  out.cv_error = mean(out.fold_errors);
  return out;
}

std::size_t Grid::size() const {
  if (axes.empty()) return 0;
  std::size_t n = 1;
  for (const auto& a : axes) {
    if (a.values.empty()) return 0;
    if (n > max_size) return n;  // already over the cap; avoid overflow
    n *= a.values.size();
  }
  return n;
}

void Grid::validate() const {
  if (axes.empty()) throw ValidationError("grid: needs at least one axis");
  for (std::size_t a = 0; a < axes.size(); ++a) {
    if (axes[a].values.empty()) throw ValidationError("grid: axis '" + axes[a].name + "' has no values");
    for (std::size_t b = 0; b < a; ++b) {
      if (axes[b].name == axes[a].name) throw ValidationError("grid: duplicate axis '" + axes[a].name + "'");
    }
  }
  if (size() > max_size) {
    throw ValidationError("grid: " + std::to_string(size()) + " configurations exceed max_size " +
                          std::to_string(max_size) + "; raise max_size explicitly to allow it");
  }
}

json Grid::config(std::size_t index) const {
  if (index >= size()) throw ValidationError("grid: configuration index out of range");
  json out = json::object();
  for (auto a = axes.size(); a-- > 0;) {
    const auto n = axes[a].values.size();
    out[axes[a].name] = axes[a].values[index % n];
    index /= n;
  }
  return out;
}

void to_json(json& j, const Grid& g) {
  json axes = json::array();
  for (const auto& a : g.axes) axes.push_back(json{{"name", a.name}, {"values", a.values}});
  j = json{{"axes", std::move(axes)}, {"max_size", g.max_size}};
}

void from_json(const json& j, Grid& g) {
  check_keys(j, {"axes", "max_size"}, "grid");
  read_optional(j, "max_size", g.max_size, "grid");
  g.axes.clear();
  for (const auto& a : j.at("axes")) {
    check_keys(a, {"name", "values"}, "grid axis");
    g.axes.push_back(GridAxis{a.at("name").get<std::string>(), a.at("values").get<std::vector<json>>()});
  }
  g.validate();
}

BoostParams apply_config(BoostParams base, const json& config) {
  try {
    for (const auto& [name, value] : config.items()) {
      if (name == "n_stages") {
        base.n_stages = value.get<int>();
      } else if (name == "learning_rate") {
        base.learning_rate = value.get<double>();
      } else if (name == "l1_penalty") {
        base.l1_penalty = value.get<double>();
      } else if (name == "loss") {
        base.loss = loss_from_json(value);
      } else if (name == "line_search_loss") {
        base.line_search_loss = loss_from_json(value);
      } else if (name == "weak_learner") {
        base.weak_learner = weak_learner_spec_from_json(value);
      } else if (name == "max_depth" || name == "min_samples_leaf") {
        auto* tree = std::get_if<TreeParams>(&base.weak_learner);
        TreeParams p = tree ? *tree : TreeParams{};
        (name == "max_depth" ? p.max_depth : p.min_samples_leaf) = value.get<int>();
        base.weak_learner = p;
      } else {
        throw ValidationError("grid: unknown hyperparameter '" + name + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("grid: bad value: ") + e.what());
  }
  base.validate();
  return base;
}

std::uint64_t outer_fold_seed(std::uint64_t seed) { return derive_seed(seed, kOuterStream); }
std::uint64_t inner_fold_seed(std::uint64_t seed) { return derive_seed(seed, kInnerStream); }

Selection select_config(const TargetSlice& train, const BoostParams& base, const Grid& grid,
                        const NestedCvOptions& options) {
  grid.validate();
  const FoldPlan plan = make_folds(train.rows(), options.inner_l, inner_fold_seed(options.seed));
  const std::size_t n = grid.size();
  Selection out;
  out.inner_cv_errors.assign(n, 0.0);
  parallel_for(n, options.jobs, [&](std::size_t c) {
    const BoostParams params = apply_config(base, grid.config(c));
    out.inner_cv_errors[c] = cross_validate(train, boost_fit_procedure(params), plan, options.loss).cv_error;
  });
  for (std::size_t c = 1; c < n; ++c) {
    if (out.inner_cv_errors[c] < out.inner_cv_errors[out.config_index]) out.config_index = c;
  }
  return out;
}

void to_json(json& j, const NestedCvReport& r) {
  json folds = json::array();
  for (std::size_t f = 0; f < r.folds.size(); ++f) {
    const auto& o = r.folds[f];
    folds.push_back(json{{"fold", f},
                         {"config_index", o.config_index},
                         {"chosen_config", o.chosen_config},
                         {"inner_cv_errors", o.inner_cv_errors},
                         {"fold_error", o.fold_error},
                         {"withheld_rows", o.withheld_rows}});
  }
  j = json{{"outer_error_estimate", r.outer_error_estimate}, {"per_outer_fold", std::move(folds)}};
}

NestedCvReport nested_cv(const TargetSlice& slice, const BoostParams& base, const Grid& grid,
                         const NestedCvOptions& options) {
  slice.validate();
  grid.validate();
  if (options.inner_l < 2) throw ValidationError("nested_cv: inner_l must be at least 2");
  const FoldPlan outer = make_folds(slice.rows(), options.outer_k, outer_fold_seed(options.seed));
  const auto k = static_cast<std::size_t>(outer.k);
  NestedCvReport report;
  report.folds.resize(k);
  NestedCvOptions inner = options;
  inner.jobs = 1;
  parallel_for(k, options.jobs, [&](std::size_t f) {
    const auto fold = static_cast<int>(f);
    const TargetSlice train = slice.subset(outer.rows_not_in(fold));
    const auto held_rows = outer.rows_in(fold);
    const TargetSlice held = slice.subset(held_rows);
    Selection sel = select_config(train, base, grid, inner);
    const json chosen = grid.config(sel.config_index);
    const auto model = base_boost(train, apply_config(base, chosen)).model;
    auto& o = report.folds[f];
    o.config_index = sel.config_index;
    o.chosen_config = chosen;
    o.inner_cv_errors = std::move(sel.inner_cv_errors);
    o.fold_error = mean_loss(held.target, model.predict(held.examples), options.loss);
    o.withheld_rows = held_rows;
  });
  double sum = 0.0;
  for (const auto& o : report.folds) sum += o.fold_error;
  report.outer_error_estimate = sum / static_cast<double>(k);
  return report;
}

void to_json(json& j, const LearningCurvePoint& p) {
  j = json{{"train_size", p.train_size},
           {"train_error", p.train_error},
           {"cv_error", p.cv_error},
           {"incumbent_error", p.incumbent_error}};
}

std::vector<std::size_t> curve_subset(std::size_t m, std::size_t size, int repeat, std::uint64_t seed) {
  if (size > m) throw ValidationError("learning_curve: size exceeds the number of rows");
  Rng rng(derive_seed(derive_seed(seed, kCurveStream), static_cast<std::uint64_t>(repeat)));
  auto perm = random_permutation(m, rng);
  perm.resize(size);
  std::sort(perm.begin(), perm.end());
  return perm;
}

std::vector<LearningCurvePoint> learning_curve(const TargetSlice& slice, const BoostParams& params,
                                               const LearningCurveOptions& options) {
  slice.validate();
  params.validate();
  if (options.repeats < 1) throw ValidationError("learning_curve: repeats must be at least 1");
  if (options.sizes.empty()) throw ValidationError("learning_curve: no sizes given");
  const std::size_t m = slice.rows();
  for (std::size_t s = 0; s < options.sizes.size(); ++s) {
    const auto size = options.sizes[s];
    if (s > 0 && size <= options.sizes[s - 1]) {
      throw ValidationError("learning_curve: sizes must be strictly increasing");
    }
    if (size > m) {
      throw ValidationError("learning_curve: size " + std::to_string(size) + " exceeds " + std::to_string(m) +
                            " rows");
    }
    if (options.k_folds < 2 || size / static_cast<std::size_t>(options.k_folds) < 2) {
      throw ValidationError("learning_curve: size " + std::to_string(size) + " too small for " +
                            std::to_string(options.k_folds) + " folds");
    }
  }

  struct Task {
    std::size_t point;
    int repeat;
  };
  std::vector<Task> tasks;
  for (std::size_t p = 0; p < options.sizes.size(); ++p) {
    const int repeats = options.sizes[p] == m ? 1 : options.repeats;
    for (int r = 0; r < repeats; ++r) tasks.push_back({p, r});
  }
  std::vector<LearningCurvePoint> results(tasks.size());
  parallel_for(tasks.size(), options.jobs, [&](std::size_t t) {
    const auto size = options.sizes[tasks[t].point];
    const TargetSlice sub = slice.subset(curve_subset(m, size, tasks[t].repeat, options.seed));
    const CvReport report = modified_cross_validation(sub, params, options.k_folds, options.loss);
    const auto model = base_boost(sub, params).model;
    results[t] = LearningCurvePoint{size, mean_loss(sub.target, model.predict(sub.examples), options.loss),
                                    report.cv_error, report.incumbent_error};
  });

  std::vector<LearningCurvePoint> curve;
  for (std::size_t p = 0; p < options.sizes.size(); ++p) {
    LearningCurvePoint point{options.sizes[p], 0.0, 0.0, 0.0};
    int count = 0;
    for (std::size_t t = 0; t < tasks.size(); ++t) {
      if (tasks[t].point != p) continue;
      point.train_error += results[t].train_error;
      point.cv_error += results[t].cv_error;
      point.incumbent_error += results[t].incumbent_error;
      ++count;
    }
    point.train_error /= count;
    point.cv_error /= count;
    point.incumbent_error /= count;
    curve.push_back(point);
  }
  return curve;
}

}  // namespace priorboost
