#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "priorboost/errors.hpp"
#include "priorboost/explain.hpp"
#include "priorboost/rng.hpp"

using namespace priorboost;

namespace {

Matrix random_rows(Eigen::Index m, Eigen::Index n, Rng& rng) {
  Matrix x(m, n);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) x(i, j) = rng.uniform(-2, 2);
  }
  return x;
}

std::vector<std::vector<double>> as_rows(const Matrix& m) {
  std::vector<std::vector<double>> out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.emplace_back(m.row(i).begin(), m.row(i).end());
  return out;
}

// Nonlinear test model with interactions; ignores the last feature.
double wiggly(std::span<const double> x) {
  double v = std::sin(x[0]) * x[1] + x[2] * x[2];
  for (std::size_t k = 3; k + 1 < x.size(); ++k) v += 0.5 * x[k] * x[k - 1];
  return v;
}

double sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

}  // namespace

TEST_CASE("linear model against one background row") {
  const std::vector<double> w{1.5, -2.0, 0.25};
  const Model model = [&](std::span<const double> x) { return w[0] * x[0] + w[1] * x[1] + w[2] * x[2] + 3.0; };
  Matrix background(1, 3);
  background << 0.5, -1.0, 2.0;
  const std::vector<double> x{2.0, 1.0, -1.0};
  const auto a = shapley_exact(model, x, background);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(a.phis[k] == doctest::Approx(w[k] * (x[k] - background(0, static_cast<Eigen::Index>(k)))).epsilon(1e-12));
  }
  const auto brute = oracle::permutation_shapley(model, x, as_rows(background));
  for (std::size_t k = 0; k < 3; ++k) CHECK(a.phis[k] == doctest::Approx(brute[k]).epsilon(1e-12));
  CHECK(a.base_value == doctest::Approx(model(std::vector<double>{0.5, -1.0, 2.0})));
}

TEST_CASE("exact values match the permutation oracle and are locally accurate") {
  Rng rng(1);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix background = random_rows(8, 6, rng);
    const Matrix xs = random_rows(1, 6, rng);
    const std::vector<double> x(xs.row(0).begin(), xs.row(0).end());
    const auto a = shapley_exact(wiggly, x, background);
    const auto brute = oracle::permutation_shapley(wiggly, x, as_rows(background));
    for (std::size_t k = 0; k < 6; ++k) CHECK(std::abs(a.phis[k] - brute[k]) < 1e-10);
    CHECK(std::abs(a.base_value + sum(a.phis) - a.prediction) < 1e-8);
    CHECK(a.phis[5] == 0.0);  // dummy
  }
}

TEST_CASE("symmetric features share credit") {
  const Model model = [](std::span<const double> x) { return x[0] * x[1] + x[2]; };
  Matrix background(2, 3);
  background << 0.5, 0.5, 1.0, -1.0, -1.0, 0.0;
  const std::vector<double> x{2.0, 2.0, 3.0};
  const auto a = shapley_exact(model, x, background);
  CHECK(a.phis[0] == doctest::Approx(a.phis[1]).epsilon(1e-14));
}

TEST_CASE("attributions are linear in the model") {
  Rng rng(2);
  const Matrix background = random_rows(5, 4, rng);
  const std::vector<double> x{0.3, -1.2, 1.7, 0.4};
  const Model f = wiggly;
  const Model g = [](std::span<const double> z) { return std::exp(0.3 * z[0]) - z[3] * z[1]; };
  const Model fg = [&](std::span<const double> z) { return f(z) + g(z); };
  const auto af = shapley_exact(f, x, background);
  const auto ag = shapley_exact(g, x, background);
  const auto afg = shapley_exact(fg, x, background);
  for (std::size_t k = 0; k < 4; ++k) CHECK(std::abs(afg.phis[k] - af.phis[k] - ag.phis[k]) < 1e-12);
}

TEST_CASE("nine features are handled exactly; larger problems need sampling") {
  Rng rng(3);
  const Matrix background = random_rows(4, 9, rng);
  std::vector<double> x(9, 0.7);
  const auto a = shapley_exact(wiggly, x, background, 15, 4);
  CHECK(std::abs(a.base_value + sum(a.phis) - a.prediction) < 1e-8);
  CHECK(a.phis[8] == 0.0);
  CHECK_THROWS_WITH_AS(shapley_exact(wiggly, x, background, 8), doctest::Contains("sampling"), ValidationError);
  CHECK_THROWS_AS(shapley_exact(wiggly, x, Matrix(0, 9)), ValidationError);
  CHECK_THROWS_AS(shapley_exact(wiggly, std::vector<double>(3, 0.0), background), ValidationError);
}

TEST_CASE("thread count does not change exact values") {
  Rng rng(4);
  const Matrix background = random_rows(6, 7, rng);
  const std::vector<double> x{1, 2, 3, 4, 5, 6, 7};
  CHECK(shapley_exact(wiggly, x, background, 15, 1).phis == shapley_exact(wiggly, x, background, 15, 3).phis);
}

TEST_CASE("sampled estimates agree with exact values") {
  Rng rng(5);
  const Matrix background = random_rows(10, 6, rng);
  const std::vector<double> x{1.1, -0.4, 1.5, -1.8, 0.9, 0.2};
  const auto exact = shapley_exact(wiggly, x, background);
  const auto sampled = shapley_sampled(wiggly, x, background, 2000, 42);
  for (std::size_t k = 0; k < 6; ++k) {
    CHECK(std::abs(sampled.phis[k] - exact.phis[k]) <= 3.0 * sampled.standard_errors[k] + 1e-12);
  }
  CHECK(sampled.phis[5] == 0.0);
  CHECK(std::abs(sampled.base_value + sum(sampled.phis) - sampled.prediction) < 1e-9);
  CHECK(sampled.adjusted);
}

TEST_CASE("sampling error shrinks as the sample doubles") {
  Rng rng(6);
  const Matrix background = random_rows(10, 6, rng);
  const std::vector<double> x{1.1, -0.4, 1.5, -1.8, 0.9, 0.2};
  const auto exact = shapley_exact(wiggly, x, background);
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t n = 125; n <= 4000; n *= 2) {
    double mse = 0.0;
    for (std::uint64_t seed = 0; seed < 16; ++seed) {
      const auto a = shapley_sampled(wiggly, x, background, n, 1000 + seed);
      for (std::size_t k = 0; k < 6; ++k) mse += std::pow(a.phis[k] - exact.phis[k], 2);
    }
    CHECK(mse < previous);
    previous = mse;
  }
}

TEST_CASE("importance ordering and long-form records") {
  Attribution a;
  a.phis = {5.0, 1.0};
  a.example_id = 0;
  Attribution b;
  b.phis = {-5.0, 1.0};
  b.example_id = 1;
  Matrix features(2, 2);
  features << 1, 2, 3, 4;
  const auto s = summary_data({a, b}, features, {"F1", "F2"});
  CHECK(s.importance.importances == std::vector<double>{10.0, 2.0});
  CHECK(s.importance.order == std::vector<std::size_t>{1, 0});
  REQUIRE(s.records.size() == 4);
  CHECK(s.records[0].feature == "F2");
  CHECK(s.records[2].feature == "F1");
  CHECK(s.records[3].feature_value == 3.0);
  CHECK(s.records[3].shap_value == -5.0);

  const auto doubled = summary_data({a, b, a, b}, features, {"F1", "F2"});
  CHECK(doubled.importance.importances == std::vector<double>{20.0, 4.0});
  CHECK(doubled.importance.order == s.importance.order);

  const auto single = summary_data({a}, features, {"F1", "F2"});
  CHECK(single.importance.order == std::vector<std::size_t>{1, 0});

  Attribution short_one;
  short_one.phis = {1.0};
  CHECK_THROWS_AS(summary_data({a, short_one}, features, {"F1", "F2"}), ValidationError);
}

TEST_CASE("background subsampling") {
  Rng rng(7);
  const Matrix data = random_rows(100, 2, rng);
  const Matrix bg = subsample_background(data, 64, 3);
  CHECK(bg.rows() == 64);
  CHECK(bg == subsample_background(data, 64, 3));
  CHECK(subsample_background(data.topRows(10), 64, 3) == data.topRows(10));
}
