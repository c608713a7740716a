#pragma once

// Reference implementations used only by the tests. Each one takes a
// different route from the library code it checks.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

namespace oracle {

// Number of eigenvalues of the symmetric tridiagonal matrix below x (Sturm
// sequence sign count of the LDL^T pivots).
inline int count_below(const std::vector<double>& d, const std::vector<double>& e, double x) {
  int count = 0;
  double q = 1.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double off = i == 0 ? 0.0 : e[i - 1] * e[i - 1];
    q = d[i] - x - (i == 0 ? 0.0 : off / q);
    if (q == 0.0) q = -1e-300;
    if (q < 0.0) ++count;
  }
  return count;
}

// Eigenvalues by bisection on Gershgorin bounds, ascending.
inline std::vector<double> sturm_eigenvalues(const std::vector<double>& d, const std::vector<double>& e) {
  const std::size_t n = d.size();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < n; ++i) {
    double radius = 0.0;
    if (i > 0) radius += std::abs(e[i - 1]);
    if (i + 1 < n) radius += std::abs(e[i]);
    lo = std::min(lo, d[i] - radius);
    hi = std::max(hi, d[i] + radius);
  }
  lo -= 1.0;
  hi += 1.0;
  std::vector<double> out;
  for (std::size_t k = 0; k < n; ++k) {
    double a = lo;
    double b = hi;
    for (int it = 0; it < 200 && b - a > 1e-14 * std::max(1.0, std::abs(a) + std::abs(b)); ++it) {
      const double mid = 0.5 * (a + b);
      if (count_below(d, e, mid) > static_cast<int>(k)) {
        b = mid;
      } else {
        a = mid;
      }
    }
    out.push_back(0.5 * (a + b));
  }
  return out;
}

inline double l1_objective(std::span<const double> h, std::span<const double> b, std::span<const double> y,
                           double l1, double alpha) {
  double sum = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) sum += std::abs(y[i] - (h[i] + alpha * b[i]));
  return sum + l1 * std::abs(alpha);
}

// Dense grid search over [lo, hi]; returns (argmin, min).
inline std::pair<double, double> grid_line_search(std::span<const double> h, std::span<const double> b,
                                                  std::span<const double> y, double l1, double lo, double hi,
                                                  double step) {
  const auto n = static_cast<long>(std::llround((hi - lo) / step));
  double best_alpha = lo;
  double best = std::numeric_limits<double>::infinity();
  for (long i = 0; i <= n; ++i) {
    const double alpha = lo + static_cast<double>(i) * step;
    const double v = l1_objective(h, b, y, l1, alpha);
    if (v < best) {
      best = v;
      best_alpha = alpha;
    }
  }
  return {best_alpha, best};
}

// Solves A x = rhs by Gaussian elimination with partial pivoting.
inline std::vector<double> gauss_solve(std::vector<std::vector<double>> a, std::vector<double> rhs) {
  const std::size_t n = rhs.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    std::swap(a[col], a[pivot]);
    std::swap(rhs[col], rhs[pivot]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      rhs[r] -= f * rhs[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = rhs[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= a[i][c] * x[c];
    x[i] = s / a[i][i];
  }
  return x;
}

// Least squares with intercept via the normal equations. rows[i] is one
// observation; returns {intercept, coef_1, ..., coef_p}.
inline std::vector<double> normal_equations(const std::vector<std::vector<double>>& rows,
                                            const std::vector<double>& y) {
  const std::size_t p = rows.front().size() + 1;
  std::vector<std::vector<double>> ata(p, std::vector<double>(p, 0.0));
  std::vector<double> aty(p, 0.0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::vector<double> a{1.0};
    a.insert(a.end(), rows[i].begin(), rows[i].end());
    for (std::size_t r = 0; r < p; ++r) {
      aty[r] += a[r] * y[i];
      for (std::size_t c = 0; c < p; ++c) ata[r][c] += a[r] * a[c];
    }
  }
  return gauss_solve(ata, aty);
}

struct BestSplit {
  double threshold = 0.0;
  double sse = std::numeric_limits<double>::infinity();
};

// Every midpoint between distinct sorted values of a 1-D feature, scored by
// the summed squared error of the two sides.
inline BestSplit exhaustive_split(const std::vector<double>& x, const std::vector<double>& r, std::size_t min_leaf) {
  std::vector<double> values = x;
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  BestSplit best;
  for (std::size_t v = 0; v + 1 < values.size(); ++v) {
    const double t = 0.5 * (values[v] + values[v + 1]);
    std::vector<double> left;
    std::vector<double> right;
    for (std::size_t i = 0; i < x.size(); ++i) (x[i] <= t ? left : right).push_back(r[i]);
    if (left.size() < min_leaf || right.size() < min_leaf) continue;
    double sse = 0.0;
    for (const auto* side : {&left, &right}) {
      const double mean = std::accumulate(side->begin(), side->end(), 0.0) / static_cast<double>(side->size());
      for (double v2 : *side) sse += (v2 - mean) * (v2 - mean);
    }
    if (sse < best.sse) best = BestSplit{t, sse};
  }
  return best;
}

// Shapley values by averaging marginal contributions over all M! orderings,
// with the interventional value function over `background`.
inline std::vector<double> permutation_shapley(const std::function<double(std::span<const double>)>& f,
                                               const std::vector<double>& x,
                                               const std::vector<std::vector<double>>& background) {
  const std::size_t m = x.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> phi(m, 0.0);
  double count = 0.0;
  auto value = [&](const std::vector<bool>& in) {
    double sum = 0.0;
    std::vector<double> z(m);
    for (const auto& b : background) {
      for (std::size_t k = 0; k < m; ++k) z[k] = in[k] ? x[k] : b[k];
      sum += f(z);
    }
    return sum / static_cast<double>(background.size());
  };
  do {
    std::vector<bool> in(m, false);
    double prev = value(in);
    for (auto k : order) {
      in[k] = true;
      const double cur = value(in);
      phi[k] += cur - prev;
      prev = cur;
    }
    count += 1.0;
  } while (std::next_permutation(order.begin(), order.end()));
  for (auto& p : phi) p /= count;
  return phi;
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0.0;
  double mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double cov = 0.0;
  double va = 0.0;
  double vb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cov += (a[i] - ma) * (b[i] - mb);
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
  }
  return cov / std::sqrt(va * vb);
}

}  // namespace oracle
