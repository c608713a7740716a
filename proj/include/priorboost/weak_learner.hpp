#pragma once

#include <cstdint>
#include <span>
#include <variant>

#include "priorboost/json_util.hpp"
#include "priorboost/linear.hpp"
#include "priorboost/stacking.hpp"
#include "priorboost/tree.hpp"

namespace priorboost {

struct LinearParams {
  friend bool operator==(const LinearParams&, const LinearParams&) = default;
};

// Which basis function family the booster induces at each stage.
using WeakLearnerSpec = std::variant<TreeParams, LinearParams, StackingParams>;

void weak_learner_spec_to_json(json& j, const WeakLearnerSpec& spec);
WeakLearnerSpec weak_learner_spec_from_json(const json& j);

// A fitted basis function b(X; theta).
class WeakLearner {
 public:
  using Impl = std::variant<RegressionTree, LinearModel, StackingRegressor>;

  explicit WeakLearner(Impl impl) : impl_(std::move(impl)) {}

  double predict(std::span<const double> x) const;
  const Impl& impl() const { return impl_; }

  // {"kind": "tree" | "linear" | "stacking", "payload": {...}}
  json to_json() const;
  static WeakLearner from_json(const json& j);

 private:
  Impl impl_;
};

WeakLearner fit_weak_learner(const WeakLearnerSpec& spec, const Matrix& x, std::span<const double> r,
                             std::uint64_t seed);

}  // namespace priorboost
