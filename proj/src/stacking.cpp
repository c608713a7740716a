#include "priorboost/stacking.hpp"

#include <string>

#include "priorboost/errors.hpp"
#include "priorboost/folds.hpp"
#include "priorboost/log.hpp"

namespace priorboost {

namespace {

constexpr double kRidgeLambda = 1e-8;

std::string_view kind_name(BaseLearnerKind kind) {
  switch (kind) {
    case BaseLearnerKind::linear:
      return "linear";
    case BaseLearnerKind::tree:
      return "tree";
    case BaseLearnerKind::nearest_neighbor:
      return "nearest_neighbor";
  }
  return "unknown";
}

Matrix take_rows(const Matrix& x, const std::vector<std::size_t>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

}  // namespace

void StackingParams::validate() const {
  if (base_learners.size() < 2) throw ValidationError("stacking: need at least 2 base learners");
  if (oof_folds < 2) throw ValidationError("stacking: oof_folds must be at least 2");
  for (const auto& b : base_learners) {
    if (b.kind == BaseLearnerKind::tree) b.tree.validate();
  }
}

void to_json(json& j, const BaseLearnerSpec& s) {
  if (s.kind == BaseLearnerKind::tree) {
    j = s.tree;
  } else {
    j = json::object();
  }
  j["kind"] = kind_name(s.kind);
}

void from_json(const json& j, BaseLearnerSpec& s) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "linear") {
    check_keys(j, {"kind"}, "base learner");
    s = BaseLearnerSpec{BaseLearnerKind::linear, {}};
  } else if (kind == "nearest_neighbor") {
    check_keys(j, {"kind"}, "base learner");
    s = BaseLearnerSpec{BaseLearnerKind::nearest_neighbor, {}};
  } else if (kind == "tree") {
    s.kind = BaseLearnerKind::tree;
    s.tree = j.get<TreeParams>();
  } else {
    throw ValidationError("base learner: unknown kind '" + kind + "'");
  }
}

void to_json(json& j, const StackingParams& p) {
  j = json{{"base_learners", p.base_learners}, {"oof_folds", p.oof_folds}};
}

void from_json(const json& j, StackingParams& p) {
  check_keys(j, {"kind", "base_learners", "oof_folds", "meta_learner"}, "stacking params");
  read_optional(j, "base_learners", p.base_learners, "stacking params");
  read_optional(j, "oof_folds", p.oof_folds, "stacking params");
  if (auto it = j.find("meta_learner"); it != j.end() && *it != "linear") {
    throw ValidationError("stacking params: meta_learner must be linear");
  }
  p.validate();
}

BaseLearner fit_base_learner(const BaseLearnerSpec& spec, const Matrix& x, std::span<const double> r) {
  switch (spec.kind) {
    case BaseLearnerKind::linear:
      return LinearModel::fit(x, r);
    case BaseLearnerKind::tree:
      return RegressionTree::fit(x, r, spec.tree);
    case BaseLearnerKind::nearest_neighbor:
      return NearestNeighbor::fit(x, r);
  }
  throw ValidationError("stacking: unknown base learner");
}

double predict_base_learner(const BaseLearner& learner, std::span<const double> x) {
  return std::visit([&](const auto& model) { return model.predict(x); }, learner);
}

Matrix out_of_fold_predictions(const Matrix& x, std::span<const double> r,
                               const StackingParams& params, std::uint64_t seed) {
  params.validate();
  const auto m = static_cast<std::size_t>(x.rows());
  if (m != r.size()) throw ValidationError("stacking: rows of X and length of r differ");
  if (m < static_cast<std::size_t>(params.oof_folds)) {
    throw ValidationError("stacking: " + std::to_string(m) + " rows is fewer than oof_folds = " +
                          std::to_string(params.oof_folds));
  }
  const FoldPlan plan = make_folds(m, params.oof_folds, seed);
  Matrix oof(x.rows(), static_cast<Eigen::Index>(params.base_learners.size()));
  const RowMatrix rows = x;
  for (int f = 0; f < plan.k; ++f) {
    const auto train_rows = plan.rows_not_in(f);
    const auto held_rows = plan.rows_in(f);
    const Matrix x_train = take_rows(x, train_rows);
    std::vector<double> r_train;
    r_train.reserve(train_rows.size());
    for (auto i : train_rows) r_train.push_back(r[i]);
    for (std::size_t b = 0; b < params.base_learners.size(); ++b) {
      const auto learner = fit_base_learner(params.base_learners[b], x_train, r_train);
      for (auto i : held_rows) {
        oof(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(b)) =
            predict_base_learner(learner, row_of(rows, static_cast<Eigen::Index>(i)));
      }
    }
  }
  return oof;
}

StackingRegressor StackingRegressor::fit(const Matrix& x, std::span<const double> r,
                                         const StackingParams& params, std::uint64_t seed) {
  const Matrix oof = out_of_fold_predictions(x, r, params, seed);
  const Eigen::Map<const Vector> target(r.data(), static_cast<Eigen::Index>(r.size()));

  StackingRegressor model;
  const Eigen::RowVectorXd z_mean = oof.colwise().mean();
  const double r_mean = target.mean();
  const Matrix zc = oof.rowwise() - z_mean;
  const Vector rc = target.array() - r_mean;

  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(zc);
  if (cod.rank() == zc.cols()) {
    model.meta_coef_ = cod.solve(rc);
  } else {
    const Matrix gram = zc.transpose() * zc + kRidgeLambda * Matrix::Identity(zc.cols(), zc.cols());
    model.meta_coef_ = gram.ldlt().solve(zc.transpose() * rc);
    model.meta_regularized_ = true;
    log::debug("stacking: singular meta system, using ridge fallback");
  }
  model.meta_intercept_ = r_mean - z_mean.dot(model.meta_coef_);

  for (const auto& spec : params.base_learners) model.bases_.push_back(fit_base_learner(spec, x, r));
  return model;
}

double StackingRegressor::predict(std::span<const double> x) const {
  double sum = meta_intercept_;
  for (std::size_t b = 0; b < bases_.size(); ++b) {
    sum += meta_coef_(static_cast<Eigen::Index>(b)) * predict_base_learner(bases_[b], x);
  }
  return sum;
}

json StackingRegressor::to_json() const {
  json bases = json::array();
  for (const auto& b : bases_) {
    std::visit(
        [&bases](const auto& model) {
          using T = std::decay_t<decltype(model)>;
          std::string kind = std::is_same_v<T, LinearModel>      ? "linear"
                             : std::is_same_v<T, RegressionTree> ? "tree"
                                                                 : "nearest_neighbor";
          bases.push_back(json{{"kind", kind}, {"payload", model.to_json()}});
        },
        b);
  }
  std::vector<double> coef(meta_coef_.data(), meta_coef_.data() + meta_coef_.size());
  return json{{"base_learners", std::move(bases)},
              {"meta_coefficients", coef},
              {"meta_intercept", meta_intercept_},
              {"meta_regularized", meta_regularized_}};
}

StackingRegressor StackingRegressor::from_json(const json& j) {
  check_keys(j, {"base_learners", "meta_coefficients", "meta_intercept", "meta_regularized"}, "stacking");
  StackingRegressor model;
  for (const auto& b : j.at("base_learners")) {
    const auto kind = b.at("kind").get<std::string>();
    const auto& payload = b.at("payload");
    if (kind == "linear") {
      model.bases_.emplace_back(LinearModel::from_json(payload));
    } else if (kind == "tree") {
      model.bases_.emplace_back(RegressionTree::from_json(payload));
    } else if (kind == "nearest_neighbor") {
      model.bases_.emplace_back(NearestNeighbor::from_json(payload));
    } else {
      throw ValidationError("stacking: unknown base learner kind '" + kind + "'");
    }
  }
  const auto coef = j.at("meta_coefficients").get<std::vector<double>>();
  if (coef.size() != model.bases_.size()) {
    throw ValidationError("stacking: meta coefficient count does not match base learners");
  }
  model.meta_coef_ = Eigen::Map<const Vector>(coef.data(), static_cast<Eigen::Index>(coef.size()));
  model.meta_intercept_ = j.at("meta_intercept").get<double>();
  model.meta_regularized_ = j.value("meta_regularized", false);
  return model;
}

}  // namespace priorboost
