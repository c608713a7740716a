#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace priorboost {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Row i of a row-major matrix as a contiguous span.
inline std::span<const double> row_of(const RowMatrix& m, Eigen::Index i) {
  return {m.data() + i * m.cols(), static_cast<std::size_t>(m.cols())};
}

inline std::span<const double> as_span(const Vector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

// ---------------------------------------------------------------------------
// Losses
// ---------------------------------------------------------------------------

enum class LossKind { absolute, squared };

struct Loss {
  LossKind kind = LossKind::absolute;

  friend bool operator==(const Loss&, const Loss&) = default;
};

std::string_view to_string(LossKind kind);
LossKind loss_kind_from_string(std::string_view name);

// |y - p| or (y - p)^2. Throws ValidationError on non-finite input.
double loss_value(Loss loss, double y, double p);

// Negative derivative of the loss with respect to p. For the absolute loss
// this is sign(y - p) with sign(0) = 0.
double negative_gradient(Loss loss, double y, double p);

// ---------------------------------------------------------------------------
// Data
// ---------------------------------------------------------------------------

struct TargetSlice;

// m labeled examples. Row i of `examples` holds the prior predictions for all
// n targets; row i of `targets` holds the observations. Column j of both
// matrices describes the same quantity.
class Dataset {
 public:
  Dataset(Matrix examples, Matrix targets, std::vector<std::string> feature_names = {},
          std::vector<std::string> target_names = {},
          std::optional<std::string> units = std::nullopt);

  const Matrix& examples() const { return examples_; }
  const Matrix& targets() const { return targets_; }
  const std::vector<std::string>& feature_names() const { return feature_names_; }
  const std::vector<std::string>& target_names() const { return target_names_; }
  const std::optional<std::string>& units() const { return units_; }

  std::size_t rows() const { return static_cast<std::size_t>(examples_.rows()); }
  std::size_t n_targets() const { return static_cast<std::size_t>(examples_.cols()); }

  // Rows in the given order; names and units carried over.
  Dataset subset(std::span<const std::size_t> rows) const;

  // Single-target view for target j (0-based).
  TargetSlice slice(std::size_t j) const;

  // Content hash over shape and all numeric entries.
  std::uint64_t fingerprint() const;

 private:
  Matrix examples_;
  Matrix targets_;
  std::vector<std::string> feature_names_;
  std::vector<std::string> target_names_;
  std::optional<std::string> units_;
};

// The j-th single-target slice: all prior features plus target column j.
struct TargetSlice {
  Matrix examples;
  Vector target;
  std::size_t target_index = 0;

  std::size_t rows() const { return static_cast<std::size_t>(examples.rows()); }
  std::size_t n_features() const { return static_cast<std::size_t>(examples.cols()); }

  // Throws ValidationError when shapes disagree or target_index is out of range.
  void validate() const;

  TargetSlice subset(std::span<const std::size_t> rows) const;

  // Prior prediction (column target_index) for every row.
  Vector prior() const { return examples.col(static_cast<Eigen::Index>(target_index)); }
};

std::vector<std::string> default_names(char prefix, std::size_t n);

// ---------------------------------------------------------------------------
// Train/test split
// ---------------------------------------------------------------------------

struct SplitSpec {
  double train_fraction = 0.70;
  std::uint64_t seed = 0;
  bool shuffle = true;

  void validate() const;
};

struct SplitResult {
  Dataset train;
  Dataset test;
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
};

// m_train = round(train_fraction * m). Without shuffling the first m_train rows
// train. Throws ValidationError("degenerate split") unless m_train >= 2 and
// m_test >= 1.
SplitResult split(const Dataset& dataset, const SplitSpec& spec);

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

double mae(std::span<const double> y, std::span<const double> p);
double mae(const Vector& y, const Vector& p);

// Mean over columns of the per-column MAE.
double average_mae(const Matrix& y, const Matrix& p);

struct CorrelationMatrix {
  // Pearson correlations over columns [X_1..X_n, Y_1..Y_n].
  Matrix values;
  std::vector<std::string> labels;
  // Columns with zero variance; their off-diagonal entries are reported as 0.
  std::vector<std::size_t> zero_variance_columns;
};

CorrelationMatrix pairwise_correlations(const Dataset& dataset);

}  // namespace priorboost
