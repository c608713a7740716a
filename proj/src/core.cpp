#include "priorboost/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "priorboost/errors.hpp"
#include "priorboost/log.hpp"
#include "priorboost/rng.hpp"

namespace priorboost {

namespace {

void require_finite(double y, double p) {
  if (!std::isfinite(y) || !std::isfinite(p)) {
    throw ValidationError("loss evaluated at a non-finite value");
  }
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::absolute:
      return "absolute";
    case LossKind::squared:
      return "squared";
  }
  return "unknown";
}

LossKind loss_kind_from_string(std::string_view name) {
  if (name == "absolute") return LossKind::absolute;
  if (name == "squared") return LossKind::squared;
  throw ValidationError("unknown loss '" + std::string(name) + "' (expected absolute or squared)");
}

double loss_value(Loss loss, double y, double p) {
  require_finite(y, p);
  const double d = y - p;
  return loss.kind == LossKind::absolute ? std::abs(d) : d * d;
}

double negative_gradient(Loss loss, double y, double p) {
  require_finite(y, p);
  const double d = y - p;
  if (loss.kind == LossKind::squared) return d;
  if (d > 0.0) return 1.0;
  if (d < 0.0) return -1.0;
  return 0.0;
}

std::vector<std::string> default_names(char prefix, std::size_t n) {
  std::vector<std::string> names;
  names.reserve(n);
  for (std::size_t j = 0; j < n; ++j) names.push_back(prefix + std::to_string(j + 1));
  return names;
}

Dataset::Dataset(Matrix examples, Matrix targets, std::vector<std::string> feature_names,
                 std::vector<std::string> target_names, std::optional<std::string> units)
    : examples_(std::move(examples)),
      targets_(std::move(targets)),
      feature_names_(std::move(feature_names)),
      target_names_(std::move(target_names)),
      units_(std::move(units)) {
  if (examples_.rows() != targets_.rows() || examples_.cols() != targets_.cols()) {
    throw ValidationError("dataset: examples and targets must have identical shape");
  }
  if (examples_.rows() < 1 || examples_.cols() < 1) {
    throw ValidationError("dataset: need at least one row and one target");
  }
  if (!all_finite(examples_) || !all_finite(targets_)) {
    throw ValidationError("dataset: all entries must be finite");
  }
  const auto n = static_cast<std::size_t>(examples_.cols());
  if (feature_names_.empty()) feature_names_ = default_names('X', n);
  if (target_names_.empty()) target_names_ = default_names('Y', n);
  if (feature_names_.size() != n || target_names_.size() != n) {
    throw ValidationError("dataset: expected " + std::to_string(n) + " feature and target names");
  }
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  const auto n = examples_.cols();
  Matrix x(static_cast<Eigen::Index>(rows.size()), n);
  Matrix y(static_cast<Eigen::Index>(rows.size()), n);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= this->rows()) throw ValidationError("dataset: row index out of range");
    x.row(static_cast<Eigen::Index>(i)) = examples_.row(static_cast<Eigen::Index>(rows[i]));
    y.row(static_cast<Eigen::Index>(i)) = targets_.row(static_cast<Eigen::Index>(rows[i]));
  }
  return Dataset(std::move(x), std::move(y), feature_names_, target_names_, units_);
}

TargetSlice Dataset::slice(std::size_t j) const {
  if (j >= n_targets()) {
    throw ValidationError("target index " + std::to_string(j) + " out of range");
  }
  return TargetSlice{examples_, targets_.col(static_cast<Eigen::Index>(j)), j};
}

std::uint64_t Dataset::fingerprint() const {
  std::uint64_t h = mix64(static_cast<std::uint64_t>(examples_.rows()));
  h = mix64(h ^ static_cast<std::uint64_t>(examples_.cols()));
  auto absorb = [&h](const Matrix& m) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      for (Eigen::Index r = 0; r < m.rows(); ++r) {
        std::uint64_t bits;
        const double v = m(r, c);
        std::memcpy(&bits, &v, sizeof bits);
        h = mix64(h ^ bits);
      }
    }
  };
  absorb(examples_);
  absorb(targets_);
  return h;
}

void TargetSlice::validate() const {
  if (examples.rows() != target.size()) {
    throw ValidationError("target slice: row counts of examples and target differ");
  }
  if (target_index >= n_features()) {
    throw ValidationError("target slice: target index " + std::to_string(target_index) +
                          " out of range for " + std::to_string(n_features()) + " features");
  }
}

TargetSlice TargetSlice::subset(std::span<const std::size_t> rows) const {
  TargetSlice out;
  out.target_index = target_index;
  out.examples.resize(static_cast<Eigen::Index>(rows.size()), examples.cols());
  out.target.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto src = static_cast<Eigen::Index>(rows[i]);
    if (src >= examples.rows()) throw ValidationError("target slice: row index out of range");
    out.examples.row(static_cast<Eigen::Index>(i)) = examples.row(src);
    out.target(static_cast<Eigen::Index>(i)) = target(src);
  }
  return out;
}

void SplitSpec::validate() const {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ValidationError("split: train_fraction must lie in (0, 1)");
  }
}

SplitResult split(const Dataset& dataset, const SplitSpec& spec) {
  spec.validate();
  const std::size_t m = dataset.rows();
  const auto m_train = static_cast<std::size_t>(std::llround(spec.train_fraction * static_cast<double>(m)));
  if (m_train < 2 || m_train >= m) {
    throw ValidationError("degenerate split: " + std::to_string(m_train) + " train rows of " +
                          std::to_string(m) + " (need at least 2 train and 1 test)");
  }
  std::vector<std::size_t> order(m);
  for (std::size_t i = 0; i < m; ++i) order[i] = i;
  if (spec.shuffle) {
    Rng rng(spec.seed);
    shuffle(std::span<std::size_t>(order), rng);
  }
  std::vector<std::size_t> train_rows(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m_train));
  std::vector<std::size_t> test_rows(order.begin() + static_cast<std::ptrdiff_t>(m_train), order.end());
  auto train = dataset.subset(train_rows);
  auto test = dataset.subset(test_rows);
  return SplitResult{std::move(train), std::move(test), std::move(train_rows), std::move(test_rows)};
}

double mae(std::span<const double> y, std::span<const double> p) {
  if (y.size() != p.size() || y.empty()) {
    throw ValidationError("mae: inputs must have equal, nonzero length");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) sum += std::abs(y[i] - p[i]);
  return sum / static_cast<double>(y.size());
}

double mae(const Vector& y, const Vector& p) {
  return mae(std::span<const double>(y.data(), static_cast<std::size_t>(y.size())),
             std::span<const double>(p.data(), static_cast<std::size_t>(p.size())));
}

double average_mae(const Matrix& y, const Matrix& p) {
  if (y.rows() != p.rows() || y.cols() != p.cols() || y.size() == 0) {
    throw ValidationError("average_mae: inputs must have equal, nonempty shape");
  }
  double sum = 0.0;
  for (Eigen::Index j = 0; j < y.cols(); ++j) sum += mae(Vector(y.col(j)), Vector(p.col(j)));
  return sum / static_cast<double>(y.cols());
}

CorrelationMatrix pairwise_correlations(const Dataset& dataset) {
  if (dataset.rows() < 2) throw ValidationError("pairwise_correlations: need at least 2 rows");
  const auto n = static_cast<Eigen::Index>(dataset.n_targets());
  const auto m = static_cast<Eigen::Index>(dataset.rows());
  Matrix cols(m, 2 * n);
  cols.leftCols(n) = dataset.examples();
  cols.rightCols(n) = dataset.targets();

  CorrelationMatrix out;
  out.labels = dataset.feature_names();
  out.labels.insert(out.labels.end(), dataset.target_names().begin(), dataset.target_names().end());

  const Eigen::RowVectorXd mean = cols.colwise().mean();
  const Matrix centered = cols.rowwise() - mean;
  Vector norms(2 * n);
  for (Eigen::Index c = 0; c < 2 * n; ++c) {
    norms(c) = centered.col(c).norm();
    if (norms(c) == 0.0) out.zero_variance_columns.push_back(static_cast<std::size_t>(c));
  }
  out.values = Matrix::Identity(2 * n, 2 * n);
  for (Eigen::Index a = 0; a < 2 * n; ++a) {
    for (Eigen::Index b = a + 1; b < 2 * n; ++b) {
      double r = 0.0;
      if (norms(a) > 0.0 && norms(b) > 0.0) {
        r = centered.col(a).dot(centered.col(b)) / (norms(a) * norms(b));
        r = std::clamp(r, -1.0, 1.0);
      }
      out.values(a, b) = r;
      out.values(b, a) = r;
    }
  }
  for (auto c : out.zero_variance_columns) {
    log::warn("pairwise_correlations: column '" + out.labels[c] +
              "' has zero variance; its correlations are reported as 0");
  }
  return out;
}

}  // namespace priorboost
