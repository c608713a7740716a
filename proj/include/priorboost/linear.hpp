#pragma once

#include <cstddef>
#include <span>

#include "priorboost/core.hpp"
#include "priorboost/json_util.hpp"

namespace priorboost {

// Ordinary least squares with intercept.
class LinearModel {
 public:
  LinearModel() = default;
  LinearModel(Vector coefficients, double intercept, bool rank_deficient = false)
      : coefficients_(std::move(coefficients)), intercept_(intercept), rank_deficient_(rank_deficient) {}

  // Solves on centered data with a complete orthogonal decomposition, which
  // yields the minimum-norm solution when the design is rank deficient (the
  // model is then flagged). Requires at least 2 rows.
  static LinearModel fit(const Matrix& x, std::span<const double> r);

  double predict(std::span<const double> x) const;

  const Vector& coefficients() const { return coefficients_; }
  double intercept() const { return intercept_; }
  bool rank_deficient() const { return rank_deficient_; }

  json to_json() const;
  static LinearModel from_json(const json& j);

 private:
  Vector coefficients_;
  double intercept_ = 0.0;
  bool rank_deficient_ = false;
};

// 1-nearest-neighbour regressor (Euclidean, lowest index wins ties). It
// memorizes its training rows, which makes it a useful leakage probe.
class NearestNeighbor {
 public:
  static NearestNeighbor fit(const Matrix& x, std::span<const double> r);
  double predict(std::span<const double> x) const;

  json to_json() const;
  static NearestNeighbor from_json(const json& j);

 private:
  Matrix rows_;
  Vector responses_;
};

}  // namespace priorboost
