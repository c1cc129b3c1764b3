#pragma once

// Systems used across the test suites: the three-state example with delays
// (1, lambda), the two-delay Euler-type form, and the small remark systems.

#include <cmath>
#include <initializer_list>
#include <numbers>
#include <ostream>
#include <vector>

#include "reldiff/coefficients.hpp"
#include "reldiff/delay_structure.hpp"

namespace reldiff {

// Readable gtest output for exact scalars.
inline void PrintTo(const ExactComplex& z, std::ostream* os) { *os << to_string(z); }

}  // namespace reldiff

namespace reldiff::testing {

using XMat = Matrix<ExactComplex>;
using NMat = Matrix<Complex>;

inline XMat xmat(std::initializer_list<std::initializer_list<long>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = rows.begin()->size();
  std::vector<ExactComplex> data;
  for (const auto& row : rows) {
    for (long v : row) data.emplace_back(Rational(v));
  }
  return XMat(r, c, std::move(data));
}

inline NMat nmat(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = rows.begin()->size();
  std::vector<Complex> data;
  for (const auto& row : rows) {
    for (double v : row) data.emplace_back(v, 0.0);
  }
  return NMat(r, c, std::move(data));
}

inline IntMatrix imat(std::initializer_list<std::initializer_list<std::int64_t>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = rows.begin()->size();
  std::vector<std::int64_t> data;
  for (const auto& row : rows) data.insert(data.end(), row.begin(), row.end());
  return IntMatrix(r, c, std::move(data));
}

/// Delays (1, sqrt 2) with the basis declared independent.
inline DelayVector delays_one_sqrt2() {
  return DelayVector(DelayBasis({BasisValue::rational(1), BasisValue::real(std::numbers::sqrt2)}), imat({{1, 0}, {0, 1}}));
}

/// Delays (1, 1/2) over the single basis 1/2.
inline DelayVector delays_one_half() {
  return DelayVector(DelayBasis({BasisValue::rational(make_rational(1, 2))}), imat({{2}, {1}}));
}

inline XMat shift3() { return xmat({{0, 1, 0}, {0, 0, 1}, {0, 0, 0}}); }

/// A_2 the upper shift, A_1 = -A_2^2, B = e_3.
inline SystemMatrices<ExactComplex> three_state_matrices() {
  SystemMatrices<ExactComplex> s;
  s.a = {xmat({{0, 0, -1}, {0, 0, 0}, {0, 0, 0}}), shift3()};
  s.b = xmat({{0}, {0}, {1}});
  return s;
}

inline DelaySystem<ExactComplex> three_state_sqrt2() { return {three_state_matrices(), delays_one_sqrt2()}; }
inline DelaySystem<ExactComplex> three_state_half() { return {three_state_matrices(), delays_one_half()}; }

/// x(t) = x(t - 1) + A x(t - k) + B u(t).
inline DelaySystem<ExactComplex> euler_form(const XMat& a, const XMat& b, std::int64_t k) {
  SystemMatrices<ExactComplex> s;
  s.a = {XMat::identity(a.rows()), a};
  s.b = b;
  return {s, DelayVector(DelayBasis({BasisValue::rational(1)}), imat({{1}, {k}}))};
}

/// Four-state system with delays (1, pi/4) that is controllable in no time.
inline DelaySystem<Complex> four_state_remark() {
  const double r2 = std::numbers::sqrt2;
  const double r3 = std::numbers::sqrt3;
  SystemMatrices<Complex> s;
  s.a = {nmat({{0, 1, 0, 0}, {2, 0, 0, 0}, {0, 0, 0, 1}, {-3, r2, 0, 0}}),
         nmat({{0.5, 0, -1, 0}, {0, 1, 0, 1}, {0, 0, 1, 0}, {r3, 0, 0, 2}})};
  s.b = nmat({{0}, {0}, {0}, {1}});
  return {s, DelayVector(DelayBasis({BasisValue::rational(1), BasisValue::real(std::numbers::pi / 4)}),
                         imat({{1, 0}, {0, 1}}))};
}

/// Two-state system with A_1 = [[alpha, -alpha^(1 - ell)], [0, 0]], A_2 the
/// shift, B = e_2 and delays (1, ell); alpha = 4, ell = 1/2.
inline DelaySystem<ExactComplex> two_state_remark() {
  SystemMatrices<ExactComplex> s;
  s.a = {xmat({{4, -2}, {0, 0}}), xmat({{0, 1}, {0, 0}})};
  s.b = xmat({{0}, {1}});
  return {s, delays_one_half()};
}

}  // namespace reldiff::testing
