#pragma once

#include <gmpxx.h>

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace reldiff {

using Rational = mpq_class;
using BigInt = mpz_class;
using Complex = std::complex<double>;

enum class ScalarMode { exact, numeric };

std::string_view to_string(ScalarMode mode);

Rational make_rational(std::int64_t num, std::int64_t den = 1);
Rational rational_from_double(double value);
double to_double(const Rational& q);
std::string to_string(const Rational& q);  // always "p/q", also for integers

/// Parses "p", "-p" or "p/q" (optionally with surrounding blanks). Returns
/// nullopt for anything else, including decimals.
std::optional<Rational> parse_rational(std::string_view text);

/// Parses a decimal literal ("1.25", "-3e-2", "7") exactly. Also accepts
/// "p/q". Returns nullopt on malformed input.
std::optional<Rational> parse_exact_decimal(std::string_view text);

/// True when the token is written as a floating literal (contains '.', 'e'
/// or 'E'); such values are treated as inexact approximations.
bool looks_floating(std::string_view text);

/// Complex number with exact rational real and imaginary parts.
class ExactComplex {
 public:
  ExactComplex() = default;
  ExactComplex(int value) : re_(value) {}  // NOLINT(google-explicit-constructor)
  ExactComplex(Rational re) : re_(std::move(re)) {}  // NOLINT(google-explicit-constructor)
  ExactComplex(Rational re, Rational im) : re_(std::move(re)), im_(std::move(im)) {}

  const Rational& real() const { return re_; }
  const Rational& imag() const { return im_; }

  bool is_zero() const { return sgn(re_) == 0 && sgn(im_) == 0; }
  ExactComplex conj() const { return {re_, -im_}; }
  Rational norm() const { return re_ * re_ + im_ * im_; }

  ExactComplex& operator+=(const ExactComplex& o);
  ExactComplex& operator-=(const ExactComplex& o);
  ExactComplex& operator*=(const ExactComplex& o);
  ExactComplex& operator/=(const ExactComplex& o);

  friend ExactComplex operator+(ExactComplex a, const ExactComplex& b) { return a += b; }
  friend ExactComplex operator-(ExactComplex a, const ExactComplex& b) { return a -= b; }
  friend ExactComplex operator*(ExactComplex a, const ExactComplex& b) { return a *= b; }
  friend ExactComplex operator/(ExactComplex a, const ExactComplex& b) { return a /= b; }
  friend ExactComplex operator-(const ExactComplex& a) { return {-a.re_, -a.im_}; }
  friend bool operator==(const ExactComplex& a, const ExactComplex& b) {
    return a.re_ == b.re_ && a.im_ == b.im_;
  }

  Complex to_complex() const { return {to_double(re_), to_double(im_)}; }

  /// Rough size of the representation, used to pick cheap elimination pivots.
  std::size_t bit_size() const;

 private:
  Rational re_{0};
  Rational im_{0};
};

std::string to_string(const ExactComplex& z);

template <class S>
struct ScalarTraits;

template <>
struct ScalarTraits<ExactComplex> {
  static constexpr bool exact = true;
  static constexpr ScalarMode mode = ScalarMode::exact;
  static ExactComplex zero() { return {}; }
  static ExactComplex one() { return ExactComplex(1); }
  static bool is_zero(const ExactComplex& z) { return z.is_zero(); }
  static ExactComplex from_rational(const Rational& q) { return ExactComplex(q); }
  static Complex to_complex(const ExactComplex& z) { return z.to_complex(); }
  static double magnitude(const ExactComplex& z) { return std::abs(z.to_complex()); }
  static ExactComplex conj(const ExactComplex& z) { return z.conj(); }
};

template <>
struct ScalarTraits<Complex> {
  static constexpr bool exact = false;
  static constexpr ScalarMode mode = ScalarMode::numeric;
  static Complex zero() { return {0.0, 0.0}; }
  static Complex one() { return {1.0, 0.0}; }
  static bool is_zero(const Complex& z) { return z == Complex{}; }
  static Complex from_rational(const Rational& q) { return {to_double(q), 0.0}; }
  static Complex to_complex(const Complex& z) { return z; }
  static double magnitude(const Complex& z) { return std::abs(z); }
  static Complex conj(const Complex& z) { return std::conj(z); }
};

template <>
struct ScalarTraits<Rational> {
  static constexpr bool exact = true;
  static Rational zero() { return 0; }
  static Rational one() { return 1; }
  static bool is_zero(const Rational& q) { return sgn(q) == 0; }
};

/// Formats a double so that it round-trips and is recognisably a floating
/// value (always contains '.', 'e', "inf" or "nan").
std::string format_real(double value);

}  // namespace reldiff
