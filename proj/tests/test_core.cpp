#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <set>

#include "oracles.hpp"
#include "priorboost/core.hpp"
#include "priorboost/csv.hpp"
#include "priorboost/errors.hpp"
#include "priorboost/rng.hpp"

using namespace priorboost;

namespace {

Dataset random_dataset(std::size_t m, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Matrix x(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  Matrix y(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      x(i, j) = rng.uniform(-5.0, 5.0);
      y(i, j) = x(i, j) + rng.normal();
    }
  }
  return Dataset(x, y);
}

}  // namespace

TEST_CASE("split reproduces the 95/41 partition at m = 136") {
  const auto data = random_dataset(136, 2, 1);
  const auto parts = split(data, SplitSpec{0.70, 7, true});
  CHECK(parts.train.rows() == 95);
  CHECK(parts.test.rows() == 41);
  std::set<std::size_t> all(parts.train_rows.begin(), parts.train_rows.end());
  for (auto r : parts.test_rows) CHECK(all.insert(r).second);
  CHECK(all.size() == 136);
}

TEST_CASE("unshuffled split keeps the leading rows for training") {
  const auto data = random_dataset(10, 1, 2);
  const auto parts = split(data, SplitSpec{0.5, 0, false});
  CHECK(parts.train_rows == std::vector<std::size_t>{0, 1, 2, 3, 4});
  CHECK(parts.test_rows == std::vector<std::size_t>{5, 6, 7, 8, 9});
  CHECK(parts.test.examples()(0, 0) == data.examples()(5, 0));
}

TEST_CASE("seeded split is deterministic") {
  const auto data = random_dataset(10, 1, 3);
  const auto a = split(data, SplitSpec{0.5, 42, true});
  const auto b = split(data, SplitSpec{0.5, 42, true});
  CHECK(a.train_rows == b.train_rows);
  CHECK(a.test_rows == b.test_rows);
}

TEST_CASE("degenerate splits are rejected") {
  const auto data = random_dataset(4, 1, 4);
  CHECK_THROWS_WITH_AS(split(data, SplitSpec{0.99, 0, true}), doctest::Contains("degenerate split"),
                       ValidationError);
  CHECK_THROWS_WITH_AS(split(data, SplitSpec{0.1, 0, true}), doctest::Contains("degenerate split"),
                       ValidationError);
}

TEST_CASE("loss values and negative gradients") {
  const Loss abs{LossKind::absolute};
  const Loss sq{LossKind::squared};
  CHECK(loss_value(abs, 3, 1) == 2);
  CHECK(loss_value(abs, 1, 1) == 0);
  CHECK(loss_value(sq, 3, 1) == 4);
  CHECK(negative_gradient(abs, 3, 1) == 1);
  CHECK(negative_gradient(abs, 1, 3) == -1);
  CHECK(negative_gradient(abs, 1, 1) == 0);
  CHECK(negative_gradient(sq, 3, 1) == 2);
  CHECK_THROWS_AS(loss_value(abs, NAN, 1), ValidationError);
  CHECK_THROWS_AS(negative_gradient(abs, 1, INFINITY), ValidationError);
  CHECK(loss_kind_from_string("squared") == LossKind::squared);
  CHECK_THROWS_AS(loss_kind_from_string("huber"), ValidationError);
}

TEST_CASE("absolute-loss gradient only takes values -1, 0, 1") {
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const double y = std::round(rng.uniform(-3, 3));
    const double p = std::round(rng.uniform(-3, 3));
    const double g = negative_gradient(Loss{}, y, p);
    CHECK((g == -1.0 || g == 0.0 || g == 1.0));
  }
}

TEST_CASE("mae against brute force") {
  const std::vector<double> y{1, 2};
  const std::vector<double> p{2, 4};
  CHECK(mae(y, p) == 1.5);
  CHECK(mae(y, y) == 0);
  Rng rng(6);
  std::vector<double> a(100);
  std::vector<double> b(100);
  double sum = 0.0;
  for (std::size_t i = 0; i < 100; ++i) {
    a[i] = rng.normal();
    b[i] = rng.normal();
    sum += std::abs(a[i] - b[i]);
  }
  CHECK(mae(a, b) == doctest::Approx(sum / 100).epsilon(1e-14));
  CHECK_THROWS_AS(mae(std::vector<double>{1}, std::vector<double>{1, 2}), ValidationError);
}

TEST_CASE("average mae is the mean of column maes") {
  Matrix y(2, 2);
  Matrix p(2, 2);
  y << 0, 0, 0, 0;
  p << 1, 2, -1, -2;
  CHECK(average_mae(y, p) == 1.5);
  CHECK(average_mae(y, y) == 0);
  const auto d = random_dataset(50, 4, 7);
  double mean = 0.0;
  for (Eigen::Index j = 0; j < 4; ++j) mean += mae(Vector(d.targets().col(j)), Vector(d.examples().col(j)));
  mean /= 4;
  CHECK(std::abs(average_mae(d.targets(), d.examples()) - mean) <= 1e-12 * mean);
}

TEST_CASE("multi-target absolute loss decomposes into per-target losses") {
  const auto d = random_dataset(20, 3, 8);
  for (Eigen::Index i = 0; i < 20; ++i) {
    double joint = 0.0;
    double parts = 0.0;
    for (Eigen::Index j = 0; j < 3; ++j) {
      joint += std::abs(d.targets()(i, j) - d.examples()(i, j));
      parts += loss_value(Loss{}, d.targets()(i, j), d.examples()(i, j));
    }
    CHECK(joint == parts);
  }
}

TEST_CASE("pairwise correlations match the direct formula") {
  const auto d = random_dataset(50, 2, 9);
  const auto corr = pairwise_correlations(d);
  REQUIRE(corr.values.rows() == 4);
  CHECK(corr.labels == std::vector<std::string>{"X1", "X2", "Y1", "Y2"});
  std::vector<std::vector<double>> cols;
  for (Eigen::Index j = 0; j < 2; ++j) cols.emplace_back(d.examples().col(j).begin(), d.examples().col(j).end());
  for (Eigen::Index j = 0; j < 2; ++j) cols.emplace_back(d.targets().col(j).begin(), d.targets().col(j).end());
  for (std::size_t a = 0; a < 4; ++a) {
    for (std::size_t b = 0; b < 4; ++b) {
      const double v = corr.values(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
      CHECK(v == doctest::Approx(oracle::pearson(cols[a], cols[b])).epsilon(1e-12));
      CHECK(v == corr.values(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)));
      CHECK(std::abs(v) <= 1.0);
    }
    CHECK(corr.values(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(a)) == 1.0);
  }
}

TEST_CASE("affine targets correlate perfectly; constant columns are flagged") {
  Matrix x(5, 1);
  Matrix y(5, 1);
  x << 1, 2, 3, 4, 5;
  y = 2 * x.array() + 3;
  CHECK(pairwise_correlations(Dataset(x, y)).values(0, 1) == doctest::Approx(1.0));
  Matrix c = Matrix::Constant(5, 1, 2.0);
  const auto corr = pairwise_correlations(Dataset(c, y));
  CHECK(corr.zero_variance_columns == std::vector<std::size_t>{0});
  CHECK(corr.values(0, 1) == 0.0);
  CHECK(corr.values(0, 0) == 1.0);
}

TEST_CASE("dataset validation") {
  CHECK_THROWS_AS(Dataset(Matrix(2, 2), Matrix(3, 2)), ValidationError);
  Matrix bad = Matrix::Zero(2, 1);
  bad(1, 0) = NAN;
  CHECK_THROWS_AS(Dataset(bad, Matrix::Zero(2, 1)), ValidationError);
  const auto d = random_dataset(5, 2, 10);
  const auto s = d.slice(1);
  CHECK(s.target_index == 1);
  CHECK(s.prior() == d.examples().col(1));
  CHECK_THROWS_AS(d.slice(2), ValidationError);
  CHECK(d.fingerprint() == random_dataset(5, 2, 10).fingerprint());
  CHECK(d.fingerprint() != random_dataset(5, 2, 11).fingerprint());
}

TEST_CASE("csv round trip and diagnostics") {
  const auto d = random_dataset(7, 3, 11);
  const auto path = std::filesystem::temp_directory_path() / "priorboost_core_test.csv";
  csv::write_dataset(path, d);
  const auto back = csv::read_dataset(path);
  CHECK(back.examples() == d.examples());
  CHECK(back.targets() == d.targets());
  CHECK(back.target_names() == d.target_names());
  std::filesystem::remove(path);

  CHECK_THROWS_WITH_AS(csv::parse_table("X1,Y1\n1,2\n3\n", "t"), doctest::Contains("row 3"), ValidationError);
  CHECK_THROWS_WITH_AS(csv::parse_table("X1,Y1\n1,abc\n", "t"), doctest::Contains("column 2"), ValidationError);
  CHECK_THROWS_AS(csv::dataset_from_table(csv::parse_table("A,B,C\n1,2,3\n", "t"), "t"), ValidationError);
  CHECK_THROWS_AS(csv::read_dataset("/nonexistent/file.csv"), IoError);
}
