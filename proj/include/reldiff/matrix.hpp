#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "reldiff/error.hpp"

namespace reldiff {

/// Dense row-major matrix over an arbitrary field-like scalar. Dimensions are
/// expected to be small (state dimensions in the tens), so there is no
/// blocking or sparse path.
template <class S>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, S(0)) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<S> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) throw Error(ErrorKind::dimension_mismatch, "matrix data size");
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = S(1);
    return m;
  }
  static Matrix zero(std::size_t rows, std::size_t cols) { return Matrix(rows, cols); }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  S& operator()(std::size_t i, std::size_t j) {
    assert(i < rows_ && j < cols_);
    return data_[i * cols_ + j];
  }
  const S& operator()(std::size_t i, std::size_t j) const {
    assert(i < rows_ && j < cols_);
    return data_[i * cols_ + j];
  }

  std::span<const S> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  const std::vector<S>& data() const { return data_; }

  std::vector<S> column(std::size_t j) const {
    std::vector<S> c;
    c.reserve(rows_);
    for (std::size_t i = 0; i < rows_; ++i) c.push_back((*this)(i, j));
    return c;
  }

  bool is_zero() const {
    for (const auto& v : data_) {
      if (!(v == S(0))) return false;
    }
    return true;
  }

  Matrix& operator+=(const Matrix& o) {
    check_same_shape(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
  }
  Matrix& operator-=(const Matrix& o) {
    check_same_shape(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
  }
  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) throw Error(ErrorKind::dimension_mismatch, "matrix product shapes");
    Matrix c(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i) {
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const S& aik = a(i, k);
        if (aik == S(0)) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
      }
    }
    return c;
  }

  friend std::vector<S> operator*(const Matrix& a, const std::vector<S>& x) {
    if (a.cols_ != x.size()) throw Error(ErrorKind::dimension_mismatch, "matrix-vector shapes");
    std::vector<S> y(a.rows_, S(0));
    for (std::size_t i = 0; i < a.rows_; ++i) {
      for (std::size_t k = 0; k < a.cols_; ++k) y[i] += a(i, k) * x[k];
    }
    return y;
  }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

  template <class F>
  auto map(F&& f) const -> Matrix<decltype(f(std::declval<const S&>()))> {
    using T = decltype(f(std::declval<const S&>()));
    std::vector<T> out;
    out.reserve(data_.size());
    for (const auto& v : data_) out.push_back(f(v));
    return Matrix<T>(rows_, cols_, std::move(out));
  }

  /// Copies `block` into this matrix with its top-left corner at (r, c).
  void set_block(std::size_t r, std::size_t c, const Matrix& block) {
    if (r + block.rows_ > rows_ || c + block.cols_ > cols_) {
      throw Error(ErrorKind::dimension_mismatch, "block out of range");
    }
    for (std::size_t i = 0; i < block.rows_; ++i) {
      for (std::size_t j = 0; j < block.cols_; ++j) (*this)(r + i, c + j) = block(i, j);
    }
  }

  Matrix block(std::size_t r, std::size_t c, std::size_t nr, std::size_t nc) const {
    if (r + nr > rows_ || c + nc > cols_) throw Error(ErrorKind::dimension_mismatch, "block out of range");
    Matrix out(nr, nc);
    for (std::size_t i = 0; i < nr; ++i) {
      for (std::size_t j = 0; j < nc; ++j) out(i, j) = (*this)(r + i, c + j);
    }
    return out;
  }

 private:
  void check_same_shape(const Matrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw Error(ErrorKind::dimension_mismatch, "matrix shapes differ");
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<S> data_;
};

/// Horizontal concatenation [B_1 | B_2 | ...]; all blocks must share a row count.
template <class S>
Matrix<S> hstack(std::span<const Matrix<S>> blocks, std::size_t rows) {
  std::size_t cols = 0;
  for (const auto& b : blocks) {
    if (b.rows() != rows) throw Error(ErrorKind::dimension_mismatch, "hstack row count");
    cols += b.cols();
  }
  Matrix<S> out(rows, cols);
  std::size_t c = 0;
  for (const auto& b : blocks) {
    out.set_block(0, c, b);
    c += b.cols();
  }
  return out;
}

template <class S>
Matrix<S> hstack(const std::vector<Matrix<S>>& blocks, std::size_t rows) {
  return hstack(std::span<const Matrix<S>>(blocks), rows);
}

template <class S>
Matrix<S> power(const Matrix<S>& a, unsigned exponent) {
  Matrix<S> result = Matrix<S>::identity(a.rows());
  for (unsigned i = 0; i < exponent; ++i) result = result * a;
  return result;
}

}  // namespace reldiff
