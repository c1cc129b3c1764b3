#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "reldiff/error.hpp"
#include "reldiff/matrix.hpp"
#include "reldiff/scalar.hpp"

namespace reldiff {

/// Rank together with a set of linearly independent columns spanning the
/// column space (the first `rank` pivot columns of the elimination).
struct ColumnRank {
  std::size_t rank = 0;
  std::vector<std::size_t> basis_columns;
};

/// Exact rank over the field of `S` by Gaussian elimination. Instantiated for
/// Rational and ExactComplex.
template <class S>
ColumnRank exact_column_rank(const Matrix<S>& m);

/// Numerical rank: number of singular values above tol * sigma_max, where tol
/// defaults to max(rows, cols) * machine epsilon.
ColumnRank numeric_column_rank(const Matrix<Complex>& m, std::optional<double> relative_tolerance = std::nullopt);

double default_rank_tolerance(std::size_t rows, std::size_t cols);

/// Right inverse R of a full-row-rank d x k matrix G (G R = I_d).
/// Exact: invert the d pivot columns, zero rows elsewhere.
Matrix<ExactComplex> exact_right_inverse(const Matrix<ExactComplex>& g);
/// Numeric: minimum-norm right inverse (Moore-Penrose pseudo-inverse via SVD).
Matrix<Complex> numeric_right_inverse(const Matrix<Complex>& g, std::optional<double> relative_tolerance = std::nullopt);

/// Exact inverse of a square nonsingular matrix (Gauss-Jordan).
template <class S>
Matrix<S> exact_inverse(const Matrix<S>& m);

Matrix<Complex> to_numeric(const Matrix<ExactComplex>& m);

}  // namespace reldiff
