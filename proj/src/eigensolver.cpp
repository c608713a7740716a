#include "priorboost/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "priorboost/csv.hpp"
#include "priorboost/errors.hpp"

namespace priorboost {

double tridiagonal_norm(std::span<const double> d, std::span<const double> e) {
  double norm = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    double row = std::abs(d[i]);
    if (i > 0) row += std::abs(e[i - 1]);
    if (i + 1 < d.size()) row += std::abs(e[i]);
    norm = std::max(norm, row);
  }
  return norm;
}

TridiagonalEigen tridiagonal_eigen(std::span<const double> diagonal, std::span<const double> off_diagonal) {
  const std::size_t n = diagonal.size();
  if (n < 1) throw ValidationError("eigensolver: empty matrix");
  if (off_diagonal.size() != n - 1) {
    throw ValidationError("eigensolver: off-diagonal must have length n - 1");
  }
  for (double v : diagonal) {
    if (!std::isfinite(v)) throw ValidationError("eigensolver: non-finite diagonal entry");
  }
  for (double v : off_diagonal) {
    if (!std::isfinite(v)) throw ValidationError("eigensolver: non-finite off-diagonal entry");
  }

  const auto N = static_cast<Eigen::Index>(n);
  std::vector<double> d(diagonal.begin(), diagonal.end());
  std::vector<double> e(n, 0.0);
  std::copy(off_diagonal.begin(), off_diagonal.end(), e.begin());
  Matrix z = Matrix::Identity(N, N);

  const double eps = std::numeric_limits<double>::epsilon();
  const std::size_t cap = 100 * n;
  std::size_t sweeps = 0;
  for (std::size_t l = 0; l < n; ++l) {
    for (;;) {
      std::size_t m = l;
      for (; m + 1 < n; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd) break;
      }
      if (m == l) break;
      if (++sweeps > cap) {
        throw NumericalError("eigensolver: no convergence after " + std::to_string(cap) +
                             " sweeps; remaining off-diagonal " + csv::format_double(std::abs(e[l])));
      }
      double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
      double r = std::hypot(g, 1.0);
      g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
      double s = 1.0;
      double c = 1.0;
      double p = 0.0;
      bool underflow = false;
      for (std::size_t i = m; i-- > l;) {
        double f = s * e[i];
        const double b = c * e[i];
        r = std::hypot(f, g);
        e[i + 1] = r;
        if (r == 0.0) {
          d[i + 1] -= p;
          e[m] = 0.0;
          underflow = true;
          break;
        }
        s = f / r;
        c = g / r;
        g = d[i + 1] - p;
        r = (d[i] - g) * s + 2.0 * c * b;
        p = s * r;
        d[i + 1] = g + p;
        g = c * r - b;
        const auto I = static_cast<Eigen::Index>(i);
        for (Eigen::Index k = 0; k < N; ++k) {
          f = z(k, I + 1);
          z(k, I + 1) = s * z(k, I) + c * f;
          z(k, I) = c * z(k, I) - s * f;
        }
      }
      if (underflow) continue;
      d[l] -= p;
      e[l] = g;
      e[m] = 0.0;
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });

  TridiagonalEigen out;
  out.vectors.resize(N, N);
  for (std::size_t i = 0; i < n; ++i) {
    out.values.push_back(d[order[i]]);
    out.vectors.col(static_cast<Eigen::Index>(i)) = z.col(static_cast<Eigen::Index>(order[i]));
  }

  const double tolerance = 1e-10 * tridiagonal_norm(diagonal, off_diagonal);
  for (std::size_t i = 0; i < n; ++i) {
    const auto v = out.vectors.col(static_cast<Eigen::Index>(i));
    double residual = 0.0;
    for (std::size_t row = 0; row < n; ++row) {
      const auto R = static_cast<Eigen::Index>(row);
      double hv = diagonal[row] * v(R);
      if (row > 0) hv += off_diagonal[row - 1] * v(R - 1);
      if (row + 1 < n) hv += off_diagonal[row] * v(R + 1);
      residual = std::max(residual, std::abs(hv - out.values[i] * v(R)));
    }
    if (residual > tolerance) {
      throw NumericalError("eigensolver: residual " + csv::format_double(residual) + " for eigenvalue " +
                           std::to_string(i) + " exceeds " + csv::format_double(tolerance));
    }
  }
  return out;
}

}  // namespace priorboost
