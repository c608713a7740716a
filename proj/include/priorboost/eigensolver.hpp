#pragma once

#include <span>
#include <vector>

#include "priorboost/core.hpp"

namespace priorboost {

struct TridiagonalEigen {
  std::vector<double> values;  // ascending
  Matrix vectors;              // column i pairs with values[i]
};

// Symmetric tridiagonal eigenproblem by implicit-shift QL iteration with a
// total cap of 100 * n sweeps. Every pair is checked afterwards against
// |Hv - lambda v|_inf <= 1e-10 * |H|_inf; failure throws NumericalError with the
// offending residual.
TridiagonalEigen tridiagonal_eigen(std::span<const double> diagonal, std::span<const double> off_diagonal);

// |H|_inf of the symmetric tridiagonal matrix (maximum absolute row sum).
double tridiagonal_norm(std::span<const double> diagonal, std::span<const double> off_diagonal);

}  // namespace priorboost
