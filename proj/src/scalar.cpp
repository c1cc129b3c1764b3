#include "reldiff/scalar.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>

#include "reldiff/error.hpp"

namespace reldiff {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "InvalidArgument";
    case ErrorKind::zero_delay: return "ZeroDelay";
    case ErrorKind::rank_deficient_basis: return "RankDeficientBasis";
    case ErrorKind::non_positive_basis: return "NonPositiveBasis";
    case ErrorKind::dimension_mismatch: return "DimensionMismatch";
    case ErrorKind::approx_not_positive: return "ApproxNotPositive";
    case ErrorKind::surrogate_search_exceeded: return "SurrogateSearchExceeded";
    case ErrorKind::class_beyond_horizon: return "ClassBeyondHorizon";
    case ErrorKind::mixed_scalar_mode: return "MixedScalarMode";
    case ErrorKind::not_commensurable: return "NotCommensurable";
    case ErrorKind::not_comparable: return "NotComparable";
    case ErrorKind::theorem_violation: return "TheoremViolation";
    case ErrorKind::recursion_budget_exceeded: return "RecursionBudgetExceeded";
    case ErrorKind::not_controllable_at_t: return "NotControllableAtT";
    case ErrorKind::epsilon_too_large: return "EpsilonTooLarge";
    case ErrorKind::schema_error: return "SchemaError";
    case ErrorKind::rational_parse_error: return "RationalParseError";
    case ErrorKind::ambiguous_boundary: return "AmbiguousBoundary";
  }
  return "Unknown";
}

std::string_view to_string(ScalarMode mode) {
  return mode == ScalarMode::exact ? "exact" : "numeric";
}

Rational make_rational(std::int64_t num, std::int64_t den) {
  if (den == 0) throw Error(ErrorKind::invalid_argument, "zero denominator");
  Rational q(BigInt(std::to_string(num)), BigInt(std::to_string(den)));
  q.canonicalize();
  return q;
}

Rational rational_from_double(double value) {
  if (!std::isfinite(value)) throw Error(ErrorKind::invalid_argument, "non-finite value");
  Rational q(value);
  q.canonicalize();
  return q;
}

double to_double(const Rational& q) { return q.get_d(); }

std::string to_string(const Rational& q) {
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

namespace {

bool is_integer_token(std::string_view s) {
  if (s.empty()) return false;
  std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  if (i == s.size()) return false;
  for (; i < s.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  }
  return true;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

BigInt parse_bigint(std::string_view s) {
  if (!s.empty() && s[0] == '+') s.remove_prefix(1);
  return BigInt(std::string(s), 10);
}

}  // namespace

std::optional<Rational> parse_rational(std::string_view text) {
  text = trim(text);
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) {
    if (!is_integer_token(text)) return std::nullopt;
    return Rational(parse_bigint(text));
  }
  const auto num = trim(text.substr(0, slash));
  const auto den = trim(text.substr(slash + 1));
  if (!is_integer_token(num) || !is_integer_token(den)) return std::nullopt;
  BigInt d = parse_bigint(den);
  if (d == 0) return std::nullopt;
  Rational q(parse_bigint(num), d);
  q.canonicalize();
  return q;
}

std::optional<Rational> parse_exact_decimal(std::string_view text) {
  text = trim(text);
  if (auto q = parse_rational(text)) return q;
  if (text.empty()) return std::nullopt;
  bool negative = false;
  std::size_t i = 0;
  if (text[0] == '+' || text[0] == '-') {
    negative = text[0] == '-';
    ++i;
  }
  std::string digits;
  long exponent = 0;
  bool seen_digit = false;
  bool seen_point = false;
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digits.push_back(c);
      seen_digit = true;
      if (seen_point) --exponent;
    } else if (c == '.' && !seen_point) {
      seen_point = true;
    } else {
      break;
    }
  }
  if (!seen_digit) return std::nullopt;
  if (i < text.size()) {
    if (text[i] != 'e' && text[i] != 'E') return std::nullopt;
    const auto exp_text = text.substr(i + 1);
    if (!is_integer_token(exp_text)) return std::nullopt;
    try {
      exponent += std::stol(std::string(exp_text));
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }
  Rational q{BigInt(digits, 10)};
  BigInt scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(exponent < 0 ? -exponent : exponent));
  if (exponent < 0) {
    q /= Rational(scale);
  } else {
    q *= Rational(scale);
  }
  q.canonicalize();
  return negative ? Rational(-q) : q;
}

bool looks_floating(std::string_view text) {
  return text.find_first_of(".eE") != std::string_view::npos;
}

ExactComplex& ExactComplex::operator+=(const ExactComplex& o) {
  re_ += o.re_;
  im_ += o.im_;
  return *this;
}

ExactComplex& ExactComplex::operator-=(const ExactComplex& o) {
  re_ -= o.re_;
  im_ -= o.im_;
  return *this;
}

ExactComplex& ExactComplex::operator*=(const ExactComplex& o) {
  if (sgn(im_) == 0 && sgn(o.im_) == 0) {
    re_ *= o.re_;
    return *this;
  }
  Rational re = re_ * o.re_ - im_ * o.im_;
  Rational im = re_ * o.im_ + im_ * o.re_;
  re_ = std::move(re);
  im_ = std::move(im);
  return *this;
}

ExactComplex& ExactComplex::operator/=(const ExactComplex& o) {
  if (o.is_zero()) throw Error(ErrorKind::invalid_argument, "division by zero");
  if (sgn(o.im_) == 0) {
    re_ /= o.re_;
    im_ /= o.re_;
    return *this;
  }
  const Rational den = o.norm();
  Rational re = (re_ * o.re_ + im_ * o.im_) / den;
  Rational im = (im_ * o.re_ - re_ * o.im_) / den;
  re_ = std::move(re);
  im_ = std::move(im);
  return *this;
}

std::size_t ExactComplex::bit_size() const {
  auto bits = [](const Rational& q) {
    return mpz_sizeinbase(q.get_num_mpz_t(), 2) + mpz_sizeinbase(q.get_den_mpz_t(), 2);
  };
  return bits(re_) + bits(im_);
}

std::string to_string(const ExactComplex& z) {
  if (sgn(z.imag()) == 0) return to_string(z.real());
  return "(" + to_string(z.real()) + ", " + to_string(z.imag()) + ")";
}

std::string format_real(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  std::string s(buf);
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

}  // namespace reldiff
