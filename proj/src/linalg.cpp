#include "reldiff/linalg.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>

namespace reldiff {

namespace {

std::size_t bit_size(const Rational& q) {
  return mpz_sizeinbase(q.get_num_mpz_t(), 2) + mpz_sizeinbase(q.get_den_mpz_t(), 2);
}
std::size_t bit_size(const ExactComplex& z) { return z.bit_size(); }

bool is_zero(const Rational& q) { return sgn(q) == 0; }
bool is_zero(const ExactComplex& z) { return z.is_zero(); }

Eigen::MatrixXcd to_eigen(const Matrix<Complex>& m) {
  Eigen::MatrixXcd e(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
  }
  return e;
}

}  // namespace

template <class S>
ColumnRank exact_column_rank(const Matrix<S>& input) {
  Matrix<S> m = input;
  ColumnRank out;
  const std::size_t rows = m.rows();
  std::size_t r = 0;
  for (std::size_t j = 0; j < m.cols() && r < rows; ++j) {
    // Cheapest nonzero pivot keeps intermediate rationals short.
    std::size_t pivot = rows;
    std::size_t best = std::numeric_limits<std::size_t>::max();
    for (std::size_t i = r; i < rows; ++i) {
      if (is_zero(m(i, j))) continue;
      const std::size_t size = bit_size(m(i, j));
      if (size < best) {
        best = size;
        pivot = i;
      }
    }
    if (pivot == rows) continue;
    if (pivot != r) {
      for (std::size_t c = j; c < m.cols(); ++c) std::swap(m(r, c), m(pivot, c));
    }
    const S inv = S(1) / m(r, j);
    for (std::size_t i = r + 1; i < rows; ++i) {
      if (is_zero(m(i, j))) continue;
      const S factor = m(i, j) * inv;
      for (std::size_t c = j; c < m.cols(); ++c) m(i, c) -= factor * m(r, c);
    }
    out.basis_columns.push_back(j);
    ++r;
  }
  out.rank = r;
  return out;
}

template ColumnRank exact_column_rank<Rational>(const Matrix<Rational>&);
template ColumnRank exact_column_rank<ExactComplex>(const Matrix<ExactComplex>&);

template <class S>
Matrix<S> exact_inverse(const Matrix<S>& input) {
  if (input.rows() != input.cols()) throw Error(ErrorKind::dimension_mismatch, "inverse of non-square matrix");
  const std::size_t n = input.rows();
  Matrix<S> a = input;
  Matrix<S> inv = Matrix<S>::identity(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::size_t pivot = n;
    std::size_t best = std::numeric_limits<std::size_t>::max();
    for (std::size_t i = j; i < n; ++i) {
      if (is_zero(a(i, j))) continue;
      const std::size_t size = bit_size(a(i, j));
      if (size < best) {
        best = size;
        pivot = i;
      }
    }
    if (pivot == n) throw Error(ErrorKind::invalid_argument, "singular matrix");
    if (pivot != j) {
      for (std::size_t c = 0; c < n; ++c) {
        std::swap(a(j, c), a(pivot, c));
        std::swap(inv(j, c), inv(pivot, c));
      }
    }
    const S p = a(j, j);
    for (std::size_t c = 0; c < n; ++c) {
      a(j, c) /= p;
      inv(j, c) /= p;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (i == j || is_zero(a(i, j))) continue;
      const S factor = a(i, j);
      for (std::size_t c = 0; c < n; ++c) {
        a(i, c) -= factor * a(j, c);
        inv(i, c) -= factor * inv(j, c);
      }
    }
  }
  return inv;
}

template Matrix<Rational> exact_inverse<Rational>(const Matrix<Rational>&);
template Matrix<ExactComplex> exact_inverse<ExactComplex>(const Matrix<ExactComplex>&);

double default_rank_tolerance(std::size_t rows, std::size_t cols) {
  return static_cast<double>(std::max(rows, cols)) * std::numeric_limits<double>::epsilon();
}

ColumnRank numeric_column_rank(const Matrix<Complex>& m, std::optional<double> relative_tolerance) {
  ColumnRank out;
  if (m.rows() == 0 || m.cols() == 0) return out;
  const Eigen::MatrixXcd e = to_eigen(m);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(e);
  const auto& sigma = svd.singularValues();
  const double smax = sigma.size() > 0 ? sigma(0) : 0.0;
  if (smax == 0.0) return out;
  const double tol = relative_tolerance.value_or(default_rank_tolerance(m.rows(), m.cols()));
  std::size_t rank = 0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    if (sigma(i) > tol * smax) ++rank;
  }
  out.rank = rank;
  // Column-pivoted QR names which columns carry the rank.
  Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(e);
  const auto& perm = qr.colsPermutation().indices();
  for (std::size_t k = 0; k < rank; ++k) out.basis_columns.push_back(static_cast<std::size_t>(perm(k)));
  std::sort(out.basis_columns.begin(), out.basis_columns.end());
  return out;
}

Matrix<ExactComplex> exact_right_inverse(const Matrix<ExactComplex>& g) {
  const ColumnRank cr = exact_column_rank(g);
  if (cr.rank != g.rows()) throw Error(ErrorKind::invalid_argument, "matrix does not have full row rank");
  const std::size_t d = g.rows();
  Matrix<ExactComplex> square(d, d);
  for (std::size_t k = 0; k < d; ++k) {
    for (std::size_t i = 0; i < d; ++i) square(i, k) = g(i, cr.basis_columns[k]);
  }
  const Matrix<ExactComplex> inv = exact_inverse(square);
  Matrix<ExactComplex> r(g.cols(), d);
  for (std::size_t k = 0; k < d; ++k) {
    for (std::size_t i = 0; i < d; ++i) r(cr.basis_columns[k], i) = inv(k, i);
  }
  return r;
}

Matrix<Complex> numeric_right_inverse(const Matrix<Complex>& g, std::optional<double> relative_tolerance) {
  const Eigen::MatrixXcd e = to_eigen(g);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(e, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sigma = svd.singularValues();
  const double smax = sigma.size() > 0 ? sigma(0) : 0.0;
  const double tol = relative_tolerance.value_or(default_rank_tolerance(g.rows(), g.cols())) * smax;
  std::size_t rank = 0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    if (sigma(i) > tol) ++rank;
  }
  if (rank != g.rows()) throw Error(ErrorKind::invalid_argument, "matrix does not have full row rank");
  Eigen::VectorXd inv_sigma = Eigen::VectorXd::Zero(sigma.size());
  for (std::size_t i = 0; i < rank; ++i) inv_sigma(static_cast<Eigen::Index>(i)) = 1.0 / sigma(static_cast<Eigen::Index>(i));
  const Eigen::MatrixXcd pinv = svd.matrixV() * inv_sigma.asDiagonal() * svd.matrixU().adjoint();
  Matrix<Complex> r(g.cols(), g.rows());
  for (std::size_t i = 0; i < r.rows(); ++i) {
    for (std::size_t j = 0; j < r.cols(); ++j) r(i, j) = pinv(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  return r;
}

Matrix<Complex> to_numeric(const Matrix<ExactComplex>& m) {
  return m.map([](const ExactComplex& z) { return z.to_complex(); });
}

}  // namespace reldiff
