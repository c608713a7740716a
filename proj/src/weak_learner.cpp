#include "priorboost/weak_learner.hpp"

#include <string>

#include "priorboost/errors.hpp"

namespace priorboost {

void weak_learner_spec_to_json(json& j, const WeakLearnerSpec& spec) {
  std::visit(
      [&j](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, TreeParams>) {
          j = p;
          j["kind"] = "tree";
        } else if constexpr (std::is_same_v<T, LinearParams>) {
          j = json{{"kind", "linear"}};
        } else {
          j = p;
          j["kind"] = "stacking";
        }
      },
      spec);
}

WeakLearnerSpec weak_learner_spec_from_json(const json& j) {
  if (!j.is_object() || !j.contains("kind")) {
    throw ValidationError("weak_learner: expected an object with a 'kind' field");
  }
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "tree") return j.get<TreeParams>();
  if (kind == "linear") {
    check_keys(j, {"kind"}, "weak_learner");
    return LinearParams{};
  }
  if (kind == "stacking") return j.get<StackingParams>();
  throw ValidationError("weak_learner: unknown kind '" + kind + "' (expected tree, linear or stacking)");
}

double WeakLearner::predict(std::span<const double> x) const {
  return std::visit([&](const auto& model) { return model.predict(x); }, impl_);
}

json WeakLearner::to_json() const {
  return std::visit(
      [](const auto& model) {
        using T = std::decay_t<decltype(model)>;
        const char* kind = std::is_same_v<T, RegressionTree> ? "tree"
                           : std::is_same_v<T, LinearModel>  ? "linear"
                                                             : "stacking";
        return json{{"kind", kind}, {"payload", model.to_json()}};
      },
      impl_);
}

WeakLearner WeakLearner::from_json(const json& j) {
  check_keys(j, {"kind", "payload"}, "learner");
  const auto kind = j.at("kind").get<std::string>();
  const auto& payload = j.at("payload");
  if (kind == "tree") return WeakLearner(RegressionTree::from_json(payload));
  if (kind == "linear") return WeakLearner(LinearModel::from_json(payload));
  if (kind == "stacking") return WeakLearner(StackingRegressor::from_json(payload));
  throw ValidationError("learner: unknown kind '" + kind + "'");
}

WeakLearner fit_weak_learner(const WeakLearnerSpec& spec, const Matrix& x, std::span<const double> r,
                             std::uint64_t seed) {
  return std::visit(
      [&](const auto& p) -> WeakLearner {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, TreeParams>) {
          return WeakLearner(RegressionTree::fit(x, r, p));
        } else if constexpr (std::is_same_v<T, LinearParams>) {
          return WeakLearner(LinearModel::fit(x, r));
        } else {
          return WeakLearner(StackingRegressor::fit(x, r, p, seed));
        }
      },
      spec);
}

}  // namespace priorboost
