#include "priorboost/linear.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "priorboost/errors.hpp"
#include "priorboost/log.hpp"

namespace priorboost {

namespace {

Vector to_vector(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

std::vector<double> from_vector(const Vector& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

LinearModel LinearModel::fit(const Matrix& x, std::span<const double> r) {
  if (static_cast<std::size_t>(x.rows()) != r.size()) {
    throw ValidationError("linear: rows of X and length of r differ");
  }
  if (x.rows() < 2) throw ValidationError("linear: need at least 2 rows");
  const Eigen::Map<const Vector> target(r.data(), static_cast<Eigen::Index>(r.size()));
  if (!x.allFinite() || !target.allFinite()) throw ValidationError("linear: non-finite input");

  const Eigen::RowVectorXd x_mean = x.colwise().mean();
  const double r_mean = target.mean();
  Matrix centered = x.rowwise() - x_mean;
  const Vector r_centered = target.array() - r_mean;

  // Columns that are constant up to rounding carry no information; they get a
  // zero coefficient instead of a huge one from dividing by noise.
  std::vector<Eigen::Index> active;
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const double scale = x.col(c).cwiseAbs().maxCoeff();
    const double spread = centered.col(c).cwiseAbs().maxCoeff();
    if (spread > 1e-12 * std::max(scale, std::numeric_limits<double>::min())) active.push_back(c);
  }
  bool deficient = active.size() < static_cast<std::size_t>(x.cols());

  Vector coef = Vector::Zero(x.cols());
  if (!active.empty()) {
    Matrix design(x.rows(), static_cast<Eigen::Index>(active.size()));
    for (std::size_t a = 0; a < active.size(); ++a) {
      design.col(static_cast<Eigen::Index>(a)) = centered.col(active[a]);
    }
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(design);
    const Vector solved = cod.solve(r_centered);
    if (cod.rank() < design.cols()) deficient = true;
    for (std::size_t a = 0; a < active.size(); ++a) coef(active[a]) = solved(static_cast<Eigen::Index>(a));
  }
  if (deficient) log::debug("linear: rank-deficient design, using the minimum-norm solution");
  const double intercept = r_mean - x_mean.dot(coef);
  return LinearModel(std::move(coef), intercept, deficient);
}

double LinearModel::predict(std::span<const double> x) const {
  if (x.size() != static_cast<std::size_t>(coefficients_.size())) {
    throw ValidationError("linear: expected " + std::to_string(coefficients_.size()) +
                          " features, got " + std::to_string(x.size()));
  }
  double sum = intercept_;
  for (std::size_t c = 0; c < x.size(); ++c) sum += coefficients_(static_cast<Eigen::Index>(c)) * x[c];
  return sum;
}

json LinearModel::to_json() const {
  return json{{"coefficients", from_vector(coefficients_)},
              {"intercept", intercept_},
              {"rank_deficient", rank_deficient_}};
}

LinearModel LinearModel::from_json(const json& j) {
  check_keys(j, {"coefficients", "intercept", "rank_deficient"}, "linear model");
  return LinearModel(to_vector(j.at("coefficients")), j.at("intercept").get<double>(),
                     j.value("rank_deficient", false));
}

NearestNeighbor NearestNeighbor::fit(const Matrix& x, std::span<const double> r) {
  if (static_cast<std::size_t>(x.rows()) != r.size() || r.empty()) {
    throw ValidationError("nearest neighbor: need matching, nonempty X and r");
  }
  NearestNeighbor model;
  model.rows_ = x;
  model.responses_ = Eigen::Map<const Vector>(r.data(), static_cast<Eigen::Index>(r.size()));
  return model;
}

double NearestNeighbor::predict(std::span<const double> x) const {
  if (x.size() != static_cast<std::size_t>(rows_.cols())) {
    throw ValidationError("nearest neighbor: feature count mismatch");
  }
  Eigen::Index best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < rows_.rows(); ++i) {
    double d = 0.0;
    for (Eigen::Index c = 0; c < rows_.cols(); ++c) {
      const double diff = rows_(i, c) - x[static_cast<std::size_t>(c)];
      d += diff * diff;
    }
    if (d < best_dist) {
      best_dist = d;
      best = i;
    }
  }
  return responses_(best);
}

json NearestNeighbor::to_json() const {
  json rows = json::array();
  for (Eigen::Index i = 0; i < rows_.rows(); ++i) rows.push_back(from_vector(rows_.row(i).transpose()));
  return json{{"rows", std::move(rows)}, {"responses", from_vector(responses_)}};
}

NearestNeighbor NearestNeighbor::from_json(const json& j) {
  check_keys(j, {"rows", "responses"}, "nearest neighbor");
  NearestNeighbor model;
  model.responses_ = to_vector(j.at("responses"));
  const auto& rows = j.at("rows");
  if (rows.size() != static_cast<std::size_t>(model.responses_.size()) || rows.empty()) {
    throw ValidationError("nearest neighbor: rows and responses differ in length");
  }
  const auto width = rows.front().size();
  model.rows_.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    model.rows_.row(static_cast<Eigen::Index>(i)) = to_vector(rows[i]).transpose();
  }
  return model;
}

}  // namespace priorboost
