#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "priorboost/boosting.hpp"
#include "priorboost/errors.hpp"
#include "priorboost/rng.hpp"

using namespace priorboost;

namespace {

// Prior = truth + offset + slope * x_0 + noise, so the booster has something to learn.
TargetSlice synthetic_slice(std::size_t m, std::size_t n, std::uint64_t seed, double offset = 0.5,
                            double noise = 0.05) {
  Rng rng(seed);
  TargetSlice s;
  s.examples.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  s.target.resize(static_cast<Eigen::Index>(m));
  s.target_index = 0;
  for (Eigen::Index i = 0; i < s.examples.rows(); ++i) {
    for (Eigen::Index j = 0; j < s.examples.cols(); ++j) s.examples(i, j) = rng.uniform(-5, 5);
    s.target(i) = s.examples(i, 0) - offset - 0.2 * std::sin(s.examples(i, 1)) + noise * rng.normal();
  }
  return s;
}

BoostParams literal_params(int stages) {
  BoostParams p;
  p.n_stages = stages;
  p.learning_rate = 1.0;
  return p;
}

}  // namespace

TEST_CASE("squared line search is the least-squares projection") {
  const std::vector<double> h{0, 1, 2};
  const std::vector<double> b{1, -2, 0.5};
  const std::vector<double> y{1, 0, 4};
  double num = 0.0;
  double den = 0.0;
  for (int i = 0; i < 3; ++i) {
    num += b[i] * (y[i] - h[i]);
    den += b[i] * b[i];
  }
  CHECK(line_search(h, b, y, Loss{LossKind::squared}, 0.0) == doctest::Approx(num / den).epsilon(1e-15));
  // Soft thresholding: penalty larger than 2|num| switches the step off.
  CHECK(line_search(h, b, y, Loss{LossKind::squared}, 2.0 * std::abs(num) + 1e-9) == 0.0);
}

TEST_CASE("absolute line search: large penalty, zero basis, ties") {
  const std::vector<double> h{0, 0, 0, 0};
  const std::vector<double> b{1, 2, -1, 0.5};
  const std::vector<double> y{3, -1, 2, 0.7};
  double sum_abs = 0.0;
  for (double v : b) sum_abs += std::abs(v);
  CHECK(line_search(h, b, y, Loss{}, sum_abs) == 0.0);
  CHECK(line_search(h, std::vector<double>(4, 0.0), y, Loss{}, 0.0) == 0.0);
  // g is flat on [1, 3]: the smallest |alpha| wins.
  CHECK(line_search(std::vector<double>{0, 0}, std::vector<double>{1, 1}, std::vector<double>{1, 3}, Loss{}, 0.0) ==
        1.0);
  CHECK_THROWS_AS(line_search(h, b, std::vector<double>{1, 2}, Loss{}, 0.0), ValidationError);
}

TEST_CASE("absolute line search agrees with grid search on small instances") {
  Rng rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> h(5);
    std::vector<double> b(5);
    std::vector<double> y(5);
    for (int i = 0; i < 5; ++i) {
      h[i] = rng.uniform(-2, 2);
      b[i] = rng.uniform(-2, 2);
      y[i] = h[i] + b[i] * rng.uniform(-4, 4) + 0.3 * rng.normal();
    }
    const double l1 = trial % 2 == 0 ? 0.0 : rng.uniform(0, 2);
    const double alpha = line_search(h, b, y, Loss{}, l1);
    const auto [grid_alpha, grid_value] = oracle::grid_line_search(h, b, y, l1, -10, 10, 1e-4);
    CHECK(oracle::l1_objective(h, b, y, l1, alpha) <= grid_value + 1e-9);
    CHECK(std::abs(alpha - grid_alpha) <= 1e-3);
  }
}

TEST_CASE("exact prior stops at the first stage") {
  auto s = synthetic_slice(30, 2, 2);
  s.target = s.prior();
  const auto result = base_boost(s, BoostParams{});
  CHECK(result.early_stopped);
  CHECK(result.model.is_identity_prior());
  CHECK(result.training_objective.size() == 1);
  CHECK(result.training_objective[0] == 0.0);
}

TEST_CASE("one squared step with a single leaf moves by the mean residual") {
  auto s = synthetic_slice(20, 2, 3);
  s.examples.setConstant(1.0);  // nothing to split on: the tree is a single leaf
  BoostParams p = literal_params(1);
  p.loss = p.line_search_loss = Loss{LossKind::squared};
  const auto result = base_boost(s, p);
  REQUIRE(result.model.stages().size() == 1);
  const auto& stage = result.model.stages()[0];
  const Vector residual = s.target - s.prior();
  const double mean = residual.mean();
  const std::vector<double> x(2, 0.0);
  CHECK(stage.alpha * stage.learner.predict(x) == doctest::Approx(mean).epsilon(1e-12));
  CHECK(result.training_objective[1] < result.training_objective[0]);
}

TEST_CASE("training objective never increases with unit learning rate") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto s = synthetic_slice(40, 3, 10 + seed);
    for (const WeakLearnerSpec& spec : {WeakLearnerSpec{TreeParams{}}, WeakLearnerSpec{LinearParams{}}}) {
      BoostParams p = literal_params(30);
      p.weak_learner = spec;
      const auto result = base_boost(s, p);
      for (std::size_t k = 1; k < result.training_objective.size(); ++k) {
        CHECK(result.training_objective[k] <= result.training_objective[k - 1]);
      }
    }
  }
}

TEST_CASE("penalty shrinks stage coefficients") {
  const auto s = synthetic_slice(40, 2, 20);
  BoostParams p = literal_params(5);
  const auto free = base_boost(s, p);
  p.l1_penalty = 5.0;
  const auto penalized = base_boost(s, p);
  CHECK(std::abs(penalized.model.stages()[0].alpha) <= std::abs(free.model.stages()[0].alpha));
  p.l1_penalty = 1e9;
  const auto off = base_boost(s, p);
  for (const auto& stage : off.model.stages()) CHECK(stage.alpha == 0.0);
}

TEST_CASE("prediction is the prior plus the stage sum") {
  const auto s = synthetic_slice(30, 3, 4);
  const auto model = base_boost(s, literal_params(10)).model;
  Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> x{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)};
    double expected = x[0];
    for (const auto& stage : model.stages()) expected += stage.alpha * stage.learner.predict(x);
    CHECK(model.predict(x) == expected);
  }
  const auto prior = AdditiveExpansion::identity_prior(2, 3);
  CHECK(prior.predict(std::vector<double>{1.0, 2.0, 3.5}) == 3.5);
  CHECK_THROWS_AS(model.predict(std::vector<double>{1.0}), ValidationError);
}

TEST_CASE("serialize, resume and finish equals one uninterrupted run") {
  const auto s = synthetic_slice(40, 2, 6);
  BoostParams p = literal_params(12);
  p.seed = 77;
  const auto full = base_boost(s, p).model;
  BoostParams first_part = p;
  first_part.n_stages = 5;
  auto partial = base_boost(s, first_part).model;
  json j = partial.to_json();
  j["params"]["n_stages"] = 12;
  const auto resumed = resume_boost(s, AdditiveExpansion::from_json(json::parse(j.dump()))).model;
  REQUIRE(resumed.stages().size() == full.stages().size());
  CHECK(resumed.to_json().dump() == full.to_json().dump());
}

TEST_CASE("fits are bit-identical for identical inputs and seeds") {
  const auto s = synthetic_slice(40, 3, 7);
  BoostParams p;
  p.n_stages = 20;
  p.weak_learner = StackingParams{};
  p.seed = 3;
  CHECK(base_boost(s, p).model.to_json().dump() == base_boost(s, p).model.to_json().dump());
}

TEST_CASE("model JSON round trip is prediction-exact") {
  const auto s = synthetic_slice(40, 3, 8);
  const auto model = base_boost(s, BoostParams{}).model;
  const auto back = AdditiveExpansion::from_json(json::parse(model.to_json().dump()));
  const RowMatrix rows = s.examples;
  for (Eigen::Index i = 0; i < s.examples.rows(); ++i) CHECK(back.predict(row_of(rows, i)) == model.predict(row_of(rows, i)));
  json bad = model.to_json();
  bad["extra"] = 1;
  CHECK_THROWS_AS(AdditiveExpansion::from_json(bad), ValidationError);
}

TEST_CASE("perfect prior keeps the incumbent") {
  auto s = synthetic_slice(50, 2, 9);
  s.target = s.prior();
  const auto result = base_boost_cv(s, BoostParams{});
  CHECK(result.report.incumbent_error == 0.0);
  CHECK(result.report.chose_incumbent);
  CHECK(result.model.is_identity_prior());
}

TEST_CASE("constant offset prior loses to the candidate") {
  auto s = synthetic_slice(80, 2, 10, 0.0, 0.0);
  s.target = s.prior().array() - 2.0;
  const auto result = base_boost_cv(s, BoostParams{}, 5);
  CHECK(result.report.incumbent_error == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(result.report.cv_error < 2.0);
  CHECK_FALSE(result.report.chose_incumbent);
  CHECK_FALSE(result.model.is_identity_prior());
}

TEST_CASE("cv report is consistent and independent of thread count") {
  const auto s = synthetic_slice(60, 3, 11);
  BoostParams p;
  p.n_stages = 30;
  const auto a = modified_cross_validation(s, p, 5, Loss{}, 1);
  const auto b = modified_cross_validation(s, p, 5, Loss{}, 4);
  CHECK(json(a).dump() == json(b).dump());
  double cand = 0.0;
  double inc = 0.0;
  for (int f = 0; f < 5; ++f) {
    cand += a.fold_errors_candidate[static_cast<std::size_t>(f)];
    inc += a.fold_errors_incumbent[static_cast<std::size_t>(f)];
  }
  CHECK(a.cv_error == doctest::Approx(cand / 5).epsilon(1e-15));
  CHECK(a.incumbent_error == doctest::Approx(inc / 5).epsilon(1e-15));
  CHECK(a.chose_incumbent == (a.incumbent_error <= a.cv_error));
  CHECK(json(a).get<CvReport>().cv_error == a.cv_error);
}

TEST_CASE("cv preconditions") {
  const auto s = synthetic_slice(9, 2, 12);
  CHECK_THROWS_WITH_AS(base_boost_cv(s, BoostParams{}, 5), doctest::Contains("too few rows per fold"),
                       ValidationError);
  CHECK_THROWS_AS(base_boost_cv(s, BoostParams{}, 1), ValidationError);
  CHECK_THROWS_AS(base_boost(synthetic_slice(3, 2, 1), BoostParams{}), ValidationError);
  BoostParams bad;
  bad.learning_rate = 0.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = BoostParams{};
  bad.n_stages = 0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}
