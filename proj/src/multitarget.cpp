#include "priorboost/multitarget.hpp"

#include <exception>
#include <optional>
#include <string>

#include "priorboost/errors.hpp"
#include "priorboost/parallel.hpp"
#include "priorboost/rng.hpp"

namespace priorboost {

namespace {

constexpr int kSchemaVersion = 1;

MultiEvaluation evaluate(const MultiTargetModel& model, const Dataset& data) {
  if (data.n_targets() != model.n_targets()) {
    throw ValidationError("evaluate: dataset has " + std::to_string(data.n_targets()) + " targets, model has " +
                          std::to_string(model.n_targets()));
  }
  const Matrix predicted = model.predict(data.examples());
  MultiEvaluation out;
  const auto n = static_cast<Eigen::Index>(data.n_targets());
  for (Eigen::Index j = 0; j < n; ++j) {
    const Vector y = data.targets().col(j);
    out.per_target_mae.push_back(mae(y, Vector(predicted.col(j))));
    out.baseline_per_target_mae.push_back(mae(y, Vector(data.examples().col(j))));
  }
  out.average_mae = average_mae(data.targets(), predicted);
  out.baseline_average_mae = average_mae(data.targets(), data.examples());
  out.improvement_pct =
      out.baseline_average_mae > 0.0 ? 100.0 * (1.0 - out.average_mae / out.baseline_average_mae) : 0.0;
  return out;
}

}  // namespace

Vector MultiTargetModel::predict(std::span<const double> x) const {
  Vector out(static_cast<Eigen::Index>(models.size()));
  for (std::size_t j = 0; j < models.size(); ++j) out(static_cast<Eigen::Index>(j)) = models[j].predict(x);
  return out;
}

Matrix MultiTargetModel::predict(const Matrix& x) const {
  const RowMatrix rows = x;
  Matrix out(x.rows(), static_cast<Eigen::Index>(models.size()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) out.row(i) = predict(row_of(rows, i)).transpose();
  return out;
}

json MultiTargetModel::to_json() const {
  json targets = json::array();
  for (std::size_t j = 0; j < models.size(); ++j) {
    json entry{{"model", models[j].to_json()}};
    if (j < reports.size()) entry["report"] = reports[j];
    targets.push_back(std::move(entry));
  }
  return json{{"schema_version", kSchemaVersion},
              {"feature_names", feature_names},
              {"target_names", target_names},
              {"training_fingerprint", training_fingerprint},
              {"targets", std::move(targets)}};
}

MultiTargetModel MultiTargetModel::from_json(const json& j) {
  check_keys(j, {"schema_version", "feature_names", "target_names", "training_fingerprint", "targets"},
             "multi-target model");
  if (j.at("schema_version").get<int>() != kSchemaVersion) {
    throw ValidationError("multi-target model: unsupported schema_version");
  }
  MultiTargetModel model;
  model.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  model.target_names = j.at("target_names").get<std::vector<std::string>>();
  model.training_fingerprint = j.at("training_fingerprint").get<std::uint64_t>();
  for (const auto& entry : j.at("targets")) {
    check_keys(entry, {"model", "report"}, "multi-target model entry");
    model.models.push_back(AdditiveExpansion::from_json(entry.at("model")));
    if (entry.contains("report")) model.reports.push_back(entry.at("report").get<CvReport>());
  }
  for (std::size_t j = 0; j < model.models.size(); ++j) {
    if (model.models[j].target_index() != j) {
      throw ValidationError("multi-target model: models must be ordered by target index");
    }
  }
  return model;
}

std::uint64_t target_seed(std::uint64_t master_seed, std::size_t j) {
  return derive_seed(master_seed, static_cast<std::uint64_t>(j));
}

MultiTargetModel fit_multi(const Dataset& train, const FitMultiOptions& options) {
  const std::size_t n = train.n_targets();
  for (const auto& [j, params] : options.per_target) {
    if (j >= n) throw ValidationError("fit: per-target override for unknown target " + std::to_string(j + 1));
  }
  std::vector<std::optional<BoostCvResult>> results(n);
  std::vector<std::string> failures(n);
  std::vector<int> failure_kind(n, 0);  // 1 validation, 3 numerical

  parallel_for(n, options.jobs, [&](std::size_t j) {
    BoostParams params = options.shared;
    if (auto it = options.per_target.find(j); it != options.per_target.end()) params = it->second;
    params.seed = target_seed(options.master_seed, j);
    try {
      results[j] = base_boost_cv(train.slice(j), params, options.k_folds, options.cv_loss, 1);
    } catch (const NumericalError& e) {
      failures[j] = e.what();
      failure_kind[j] = 3;
    } catch (const std::exception& e) {
      failures[j] = e.what();
      failure_kind[j] = 1;
    }
  });

  std::string message;
  bool numerical = false;
  for (std::size_t j = 0; j < n; ++j) {
    if (failure_kind[j] == 0) continue;
    numerical = numerical || failure_kind[j] == 3;
    message += (message.empty() ? "" : "; ") + ("target " + std::to_string(j + 1) + ": " + failures[j]);
  }
  if (!message.empty()) {
    message = "fit failed for " + message;
    if (numerical) throw NumericalError(message);
    throw ValidationError(message);
  }

  MultiTargetModel model;
  model.feature_names = train.feature_names();
  model.target_names = train.target_names();
  model.training_fingerprint = train.fingerprint();
  for (auto& r : results) {
    model.models.push_back(std::move(r->model));
    model.reports.push_back(std::move(r->report));
  }
  return model;
}

void to_json(json& j, const MultiEvaluation& e) {
  j = json{{"per_target_mae", e.per_target_mae},
           {"average_mae", e.average_mae},
           {"baseline_per_target_mae", e.baseline_per_target_mae},
           {"baseline_average_mae", e.baseline_average_mae},
           {"improvement_pct", e.improvement_pct},
           {"on_training_data", e.on_training_data}};
}

MultiEvaluation evaluate_multi(const MultiTargetModel& model, const Dataset& test) {
  if (test.fingerprint() == model.training_fingerprint) {
    throw ValidationError(
        "evaluate: this dataset is the one the model was fitted on; use the training evaluation path "
        "explicitly");
  }
  return evaluate(model, test);
}

MultiEvaluation evaluate_multi_on_training(const MultiTargetModel& model, const Dataset& train) {
  auto out = evaluate(model, train);
  out.on_training_data = true;
  return out;
}

}  // namespace priorboost
