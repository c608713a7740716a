#include "priorboost/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "priorboost/errors.hpp"

namespace priorboost {

void TreeParams::validate() const {
  if (max_depth < 1 || max_depth > 16) throw ValidationError("tree: max_depth must lie in [1, 16]");
  if (min_samples_leaf < 1) throw ValidationError("tree: min_samples_leaf must be at least 1");
}

void to_json(json& j, const TreeParams& p) {
  j = json{{"max_depth", p.max_depth}, {"min_samples_leaf", p.min_samples_leaf}};
}

void from_json(const json& j, TreeParams& p) {
  check_keys(j, {"kind", "max_depth", "min_samples_leaf", "split_criterion"}, "tree params");
  read_optional(j, "max_depth", p.max_depth, "tree params");
  read_optional(j, "min_samples_leaf", p.min_samples_leaf, "tree params");
  if (auto it = j.find("split_criterion"); it != j.end() && *it != "variance_reduction") {
    throw ValidationError("tree params: split_criterion must be variance_reduction");
  }
  p.validate();
}

namespace {

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, std::span<const double> r, const TreeParams& params)
      : x_(x), r_(r), params_(params) {}

  std::vector<RegressionTree::Node> build() {
    std::vector<std::size_t> all(r_.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    grow(all, 0);
    return std::move(nodes_);
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
  };

  int grow(const std::vector<std::size_t>& rows, int depth) {
    const auto n = rows.size();
    double sum = 0.0;
    double lo = r_[rows.front()];
    double hi = lo;
    for (auto i : rows) {
      sum += r_[i];
      lo = std::min(lo, r_[i]);
      hi = std::max(hi, r_[i]);
    }
    const double mean = sum / static_cast<double>(n);

    const int id = static_cast<int>(nodes_.size());
    RegressionTree::Node leaf;
    leaf.value = std::clamp(mean, lo, hi);
    nodes_.push_back(leaf);

    const auto min_leaf = static_cast<std::size_t>(params_.min_samples_leaf);
    if (depth >= params_.max_depth || n < 2 * min_leaf || lo == hi) return id;

    const Split best = best_split(rows, mean);
    if (best.feature < 0) return id;

    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (auto i : rows) {
      (x_(static_cast<Eigen::Index>(i), best.feature) <= best.threshold ? left : right).push_back(i);
    }
    nodes_[static_cast<std::size_t>(id)].feature = best.feature;
    nodes_[static_cast<std::size_t>(id)].threshold = best.threshold;
    const int l = grow(left, depth + 1);
    const int r = grow(right, depth + 1);
    nodes_[static_cast<std::size_t>(id)].left = l;
    nodes_[static_cast<std::size_t>(id)].right = r;
    return id;
  }

  Split best_split(const std::vector<std::size_t>& rows, double mean) const {
    const auto n = rows.size();
    const auto min_leaf = static_cast<std::size_t>(params_.min_samples_leaf);

    double total = 0.0;
    double sse = 0.0;
    for (auto i : rows) {
      const double c = r_[i] - mean;
      total += c;
      sse += c * c;
    }
    const double parent = total * total / static_cast<double>(n);

    Split best;
    std::vector<std::size_t> order(rows);
    for (Eigen::Index f = 0; f < x_.cols(); ++f) {
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double va = x_(static_cast<Eigen::Index>(a), f);
        const double vb = x_(static_cast<Eigen::Index>(b), f);
        return va < vb || (va == vb && a < b);
      });
      double left_sum = 0.0;
      for (std::size_t p = 0; p + 1 < n; ++p) {
        left_sum += r_[order[p]] - mean;
        const std::size_t n_left = p + 1;
        const std::size_t n_right = n - n_left;
        if (n_left < min_leaf) continue;
        if (n_right < min_leaf) break;
        const double a = x_(static_cast<Eigen::Index>(order[p]), f);
        const double b = x_(static_cast<Eigen::Index>(order[p + 1]), f);
        if (!(a < b)) continue;
        const double right_sum = total - left_sum;
        const double gain = left_sum * left_sum / static_cast<double>(n_left) +
                            right_sum * right_sum / static_cast<double>(n_right) - parent;
        if (gain > best.gain) {
          double mid = 0.5 * (a + b);
          if (!(mid < b) || mid < a) mid = a;
          best = Split{static_cast<int>(f), mid, gain};
        }
      }
    }
    // Gains below rounding level of the node's squared error are not splits.
    if (best.feature >= 0 && !(best.gain > 1e-12 * sse)) best.feature = -1;
    return best;
  }

  const Matrix& x_;
  std::span<const double> r_;
  const TreeParams& params_;
  std::vector<RegressionTree::Node> nodes_;
};

int depth_of(const std::vector<RegressionTree::Node>& nodes, int id) {
  const auto& node = nodes[static_cast<std::size_t>(id)];
  if (node.is_leaf()) return 0;
  return 1 + std::max(depth_of(nodes, node.left), depth_of(nodes, node.right));
}

}  // namespace

RegressionTree RegressionTree::fit(const Matrix& x, std::span<const double> r,
                                   const TreeParams& params) {
  params.validate();
  if (static_cast<std::size_t>(x.rows()) != r.size()) {
    throw ValidationError("tree: rows of X and length of r differ");
  }
  if (x.cols() < 1) throw ValidationError("tree: need at least one feature");
  if (r.size() < 2 * static_cast<std::size_t>(params.min_samples_leaf)) {
    throw ValidationError("tree: " + std::to_string(r.size()) + " rows is fewer than 2 * min_samples_leaf");
  }
  for (double v : r) {
    if (!std::isfinite(v)) throw ValidationError("tree: non-finite response");
  }
  RegressionTree tree;
  tree.n_features_ = static_cast<std::size_t>(x.cols());
  tree.nodes_ = TreeBuilder(x, r, params).build();
  return tree;
}

double RegressionTree::predict(std::span<const double> x) const {
  if (x.size() != n_features_) {
    throw ValidationError("tree: expected " + std::to_string(n_features_) + " features, got " +
                          std::to_string(x.size()));
  }
  const Node* node = &nodes_.front();
  while (!node->is_leaf()) {
    const auto next = x[static_cast<std::size_t>(node->feature)] <= node->threshold ? node->left : node->right;
    node = &nodes_[static_cast<std::size_t>(next)];
  }
  return node->value;
}

int RegressionTree::depth() const { return nodes_.empty() ? 0 : depth_of(nodes_, 0); }

json RegressionTree::to_json() const {
  json nodes = json::array();
  for (const auto& n : nodes_) {
    if (n.is_leaf()) {
      nodes.push_back(json{{"value", n.value}});
    } else {
      nodes.push_back(json{{"feature", n.feature},
                           {"threshold", n.threshold},
                           {"left", n.left},
                           {"right", n.right},
                           {"value", n.value}});
    }
  }
  return json{{"n_features", n_features_}, {"nodes", std::move(nodes)}};
}

RegressionTree RegressionTree::from_json(const json& j) {
  check_keys(j, {"n_features", "nodes"}, "tree");
  RegressionTree tree;
  tree.n_features_ = j.at("n_features").get<std::size_t>();
  for (const auto& item : j.at("nodes")) {
    Node n;
    n.value = item.at("value").get<double>();
    if (item.contains("feature")) {
      n.feature = item.at("feature").get<int>();
      n.threshold = item.at("threshold").get<double>();
      n.left = item.at("left").get<int>();
      n.right = item.at("right").get<int>();
    }
    tree.nodes_.push_back(n);
  }
  const auto count = static_cast<int>(tree.nodes_.size());
  if (count == 0) throw ValidationError("tree: no nodes");
  for (int i = 0; i < count; ++i) {
    const auto& n = tree.nodes_[static_cast<std::size_t>(i)];
    if (!n.is_leaf() && (n.left <= i || n.left >= count || n.right <= i || n.right >= count ||
                         static_cast<std::size_t>(n.feature) >= tree.n_features_)) {
      throw ValidationError("tree: malformed node");
    }
  }
  return tree;
}

}  // namespace priorboost
