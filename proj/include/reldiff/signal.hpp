#pragma once

// Vector-valued signals of one real variable: piecewise polynomials with
// explicit breakpoints, or arbitrary evaluators.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "reldiff/delay_structure.hpp"
#include "reldiff/error.hpp"
#include "reldiff/matrix.hpp"
#include "reldiff/scalar.hpp"

namespace reldiff {

/// Floating scalars and times.
struct NumericField {
  using Scalar = Complex;
  using Time = double;
  static constexpr bool exact = false;

  static Time stamp_time(const DelayVector&, const TimeStamp& t) { return t.numeric; }
  static Time from_real(const RealTime& r) { return r.value; }
  static RealTime bound(const Time& t) { return RealTime::from_double(t); }
  static double to_double(const Time& t) { return t; }
  static Scalar scalar(const Time& t) { return {t, 0.0}; }
  static std::string time_string(const Time& t) { return format_real(t); }
  /// Breakpoint matching tolerance.
  static double tolerance(double scale) { return 1e-12 * std::max(1.0, std::abs(scale)); }
};

/// Exact rational scalars and times; requires an all-rational delay basis.
struct ExactField {
  using Scalar = ExactComplex;
  using Time = Rational;
  static constexpr bool exact = true;

  static Time stamp_time(const DelayVector& delays, const TimeStamp& t) {
    auto e = delays.exact_time(t);
    if (!e) throw Error(ErrorKind::mixed_scalar_mode, "exact times need an all-rational delay basis");
    return *e;
  }
  static Time from_real(const RealTime& r) {
    if (!r.exact) throw Error(ErrorKind::mixed_scalar_mode, "time has no exact value");
    return *r.exact;
  }
  static RealTime bound(const Time& t) { return RealTime::from_rational(t); }
  static double to_double(const Time& t) { return reldiff::to_double(t); }
  static Scalar scalar(const Time& t) { return ExactComplex(t); }
  static std::string time_string(const Time& t) { return to_string(t); }
  static double tolerance(double) { return 0.0; }
};

template <class F>
using Vec = std::vector<typename F::Scalar>;

template <class F>
struct PolynomialPiece {
  typename F::Time start;
  typename F::Time end;
  /// coeffs[i][k]: coefficient of (t - start)^k in component i.
  std::vector<std::vector<typename F::Scalar>> coeffs;
};

/// Contiguous polynomial pieces. A breakpoint shared by two pieces belongs to
/// the left piece; both domain endpoints are included.
template <class F>
class PiecewisePolynomial {
 public:
  using Scalar = typename F::Scalar;
  using Time = typename F::Time;
  using Piece = PolynomialPiece<F>;

  PiecewisePolynomial() = default;
  PiecewisePolynomial(std::size_t dim, std::vector<Piece> pieces) : dim_(dim), pieces_(std::move(pieces)) { validate(); }

  static PiecewisePolynomial constant(const Vec<F>& value, const Time& start, const Time& end) {
    Piece p{start, end, {}};
    for (const auto& v : value) p.coeffs.push_back({v});
    return PiecewisePolynomial(value.size(), {std::move(p)});
  }

  std::size_t dimension() const { return dim_; }
  const std::vector<Piece>& pieces() const { return pieces_; }
  const Time& domain_start() const { return pieces_.front().start; }
  const Time& domain_end() const { return pieces_.back().end; }

  Vec<F> evaluate(const Time& t) const {
    const std::size_t i = locate(t);
    const Piece& p = pieces_[i];
    const Time x = t - p.start;
    Vec<F> out(dim_, Scalar(0));
    const Scalar xs = F::scalar(x);
    for (std::size_t c = 0; c < dim_; ++c) {
      const auto& poly = p.coeffs[c];
      Scalar acc(0);
      for (std::size_t k = poly.size(); k-- > 0;) acc = acc * xs + poly[k];
      out[c] = acc;
    }
    return out;
  }

  /// q(s) = p(offset + s) for s in [s0, s1]. When offset + s0 is a breakpoint
  /// the result starts with a zero-length piece holding the left value there.
  PiecewisePolynomial shifted(const Time& offset, const Time& s0, const Time& s1) const {
    const double tol = F::tolerance(edge_scale());
    std::vector<Piece> out;
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
      const Piece& p = pieces_[i];
      const Time lo = std::max(Time(p.start - offset), s0);
      const Time hi = std::min(Time(p.end - offset), s1);
      const bool ends_at_window_start =
          i + 1 < pieces_.size() && out.empty() && s0 < s1 &&
          (F::exact ? Time(p.end - offset) == s0 : std::abs(F::to_double(Time(p.end - offset - s0))) <= tol);
      if (ends_at_window_start) {
        out.push_back({s0, s0, taylor_shift(p.coeffs, F::scalar(Time(p.end - p.start)))});
        continue;
      }
      if (!(lo < hi)) continue;
      out.push_back({lo, hi, taylor_shift(p.coeffs, F::scalar(Time(lo + offset - p.start)))});
    }
    if (out.empty()) {
      // Degenerate window or a window touching the domain only at one point.
      const Vec<F> v = evaluate(Time(offset + s0));
      return constant(v, s0, s1);
    }
    // Stretch the ends so floating round-off at the domain edges does not leave gaps.
    out.front().start = s0;
    out.back().end = s1;
    return PiecewisePolynomial(dim_, std::move(out));
  }

  /// Same function with extra breakpoints inserted (must lie inside the domain).
  PiecewisePolynomial refined(std::vector<Time> breaks) const {
    std::sort(breaks.begin(), breaks.end());
    const double tol = F::tolerance(std::max(std::abs(F::to_double(domain_start())), std::abs(F::to_double(domain_end()))));
    auto near = [&](const Time& a, const Time& b) { return std::abs(F::to_double(Time(a - b))) <= tol; };
    std::vector<Piece> out;
    std::size_t b = 0;
    for (const auto& p : pieces_) {
      Time lo = p.start;
      while (b < breaks.size() && !(p.start < breaks[b])) ++b;
      while (b < breaks.size() && breaks[b] < p.end) {
        // Breaks that coincide with an existing boundary (up to round-off) are dropped.
        if (near(breaks[b], lo) || near(breaks[b], p.end)) {
          ++b;
          continue;
        }
        out.push_back({lo, breaks[b], taylor_shift(p.coeffs, F::scalar(Time(lo - p.start)))});
        lo = breaks[b];
        ++b;
      }
      out.push_back({lo, p.end, taylor_shift(p.coeffs, F::scalar(Time(lo - p.start)))});
    }
    return PiecewisePolynomial(dim_, std::move(out));
  }

  std::vector<Time> breakpoints() const {
    std::vector<Time> out;
    for (std::size_t i = 1; i < pieces_.size(); ++i) out.push_back(pieces_[i].start);
    return out;
  }

  /// Pointwise sum; both operands must share the domain.
  /// Pointwise sum; both signals must share a domain. Pieces are merged by
  /// walking both lists, so zero-length pieces survive.
  PiecewisePolynomial plus(const PiecewisePolynomial& other) const {
    if (other.dim_ != dim_) throw Error(ErrorKind::dimension_mismatch, "signal dimensions differ");
    const double tol = F::tolerance(std::max(edge_scale(), other.edge_scale()));
    auto near = [&](const Time& a, const Time& b) {
      return F::exact ? a == b : std::abs(F::to_double(Time(a - b))) <= tol;
    };
    if (!near(domain_start(), other.domain_start()) || !near(domain_end(), other.domain_end())) {
      throw Error(ErrorKind::invalid_argument, "signal domains differ");
    }
    std::vector<Piece> out;
    std::size_t i = 0;
    std::size_t j = 0;
    Time cur = domain_start();
    while (i < pieces_.size() && j < other.pieces_.size()) {
      const Piece& a = pieces_[i];
      const Piece& b = other.pieces_[j];
      const bool a_first = near(a.end, b.end) || a.end < b.end;
      const Time end = a_first ? a.end : b.end;
      Piece p{cur, end, taylor_shift(a.coeffs, F::scalar(Time(cur - a.start)))};
      const auto shifted_b = taylor_shift(b.coeffs, F::scalar(Time(cur - b.start)));
      for (std::size_t c = 0; c < dim_; ++c) {
        auto& dst = p.coeffs[c];
        const auto& src = shifted_b[c];
        if (dst.size() < src.size()) dst.resize(src.size(), Scalar(0));
        for (std::size_t k = 0; k < src.size(); ++k) dst[k] += src[k];
      }
      out.push_back(std::move(p));
      if (near(a.end, b.end)) {
        ++i;
        ++j;
      } else if (a_first) {
        ++i;
      } else {
        ++j;
      }
      cur = end;
    }
    // Anything left is a zero-length piece on the shared end point, which
    // evaluation never reaches (the end belongs to the piece on its left).
    return PiecewisePolynomial(dim_, std::move(out));
  }

  /// t -> A p(t) for a matrix with dimension() columns.
  PiecewisePolynomial transformed(const Matrix<Scalar>& a) const {
    if (a.cols() != dim_) throw Error(ErrorKind::dimension_mismatch, "matrix columns differ from signal dimension");
    std::vector<Piece> out;
    for (const auto& p : pieces_) {
      std::size_t degree = 0;
      for (const auto& c : p.coeffs) degree = std::max(degree, c.size());
      Piece q{p.start, p.end, std::vector<std::vector<Scalar>>(a.rows(), std::vector<Scalar>(degree, Scalar(0)))};
      for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < dim_; ++j) {
          if (a(i, j) == Scalar(0)) continue;
          for (std::size_t k = 0; k < p.coeffs[j].size(); ++k) q.coeffs[i][k] += a(i, j) * p.coeffs[j][k];
        }
      }
      out.push_back(std::move(q));
    }
    return PiecewisePolynomial(a.rows(), std::move(out));
  }

  /// Rows [first, first + count) of the vector value.
  PiecewisePolynomial components(std::size_t first, std::size_t count) const {
    std::vector<Piece> out;
    for (const auto& p : pieces_) {
      out.push_back({p.start, p.end,
                     std::vector<std::vector<Scalar>>(p.coeffs.begin() + static_cast<std::ptrdiff_t>(first),
                                                      p.coeffs.begin() + static_cast<std::ptrdiff_t>(first + count))});
    }
    return PiecewisePolynomial(count, std::move(out));
  }

  friend bool operator==(const PiecewisePolynomial& a, const PiecewisePolynomial& b) {
    if (a.dim_ != b.dim_ || a.pieces_.size() != b.pieces_.size()) return false;
    for (std::size_t i = 0; i < a.pieces_.size(); ++i) {
      const auto& p = a.pieces_[i];
      const auto& q = b.pieces_[i];
      if (!(p.start == q.start) || !(p.end == q.end) || p.coeffs != q.coeffs) return false;
    }
    return true;
  }

 private:
  double edge_scale() const {
    return std::max(std::abs(F::to_double(domain_start())), std::abs(F::to_double(domain_end())));
  }

  static std::vector<std::vector<Scalar>> taylor_shift(const std::vector<std::vector<Scalar>>& coeffs, const Scalar& h) {
    std::vector<std::vector<Scalar>> out;
    out.reserve(coeffs.size());
    for (const auto& poly : coeffs) {
      // Repeated synthetic division by (x - h).
      std::vector<Scalar> b = poly;
      const std::size_t n = b.size();
      for (std::size_t i = 0; i + 1 < n; ++i) {
        for (std::size_t k = n - 1; k > i; --k) b[k - 1] += h * b[k];
      }
      out.push_back(std::move(b));
    }
    return out;
  }

  void validate() const {
    if (pieces_.empty()) throw Error(ErrorKind::invalid_argument, "piecewise polynomial needs at least one piece");
    const double scale = std::max(std::abs(F::to_double(pieces_.front().start)), std::abs(F::to_double(pieces_.back().end)));
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
      const Piece& p = pieces_[i];
      if (p.end < p.start) throw Error(ErrorKind::invalid_argument, "piece ends before it starts");
      if (p.coeffs.size() != dim_) throw Error(ErrorKind::dimension_mismatch, "piece has wrong number of components");
      if (i > 0) {
        const double gap = std::abs(F::to_double(Time(p.start - pieces_[i - 1].end)));
        if (gap > F::tolerance(scale)) throw Error(ErrorKind::invalid_argument, "pieces are not contiguous");
      }
    }
  }

  std::size_t locate(const Time& t) const {
    const double scale = std::max({1.0, std::abs(F::to_double(domain_start())), std::abs(F::to_double(domain_end()))});
    const double outside = F::exact ? 0.0 : 1e-9 * scale;
    if (F::to_double(Time(domain_start() - t)) > outside || F::to_double(Time(t - domain_end())) > outside ||
        (F::exact && (t < domain_start() || domain_end() < t))) {
      throw Error(ErrorKind::invalid_argument, "signal evaluated at " + F::time_string(t) + " outside [" +
                                                   F::time_string(domain_start()) + ", " +
                                                   F::time_string(domain_end()) + "]");
    }
    const double tol = F::tolerance(scale);
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
      const Time& end = pieces_[i].end;
      const bool inside = F::exact ? !(end < t) : F::to_double(Time(t - end)) <= tol;
      if (inside) return i;
    }
    return pieces_.size() - 1;
  }

  std::size_t dim_ = 0;
  std::vector<Piece> pieces_;
};

/// Either a piecewise polynomial or an opaque evaluator.
template <class F>
class SignalFunction {
 public:
  using Time = typename F::Time;
  using Evaluator = std::function<Vec<F>(const Time&)>;

  SignalFunction() = default;
  SignalFunction(PiecewisePolynomial<F> p) : dim_(p.dimension()), impl_(std::move(p)) {}  // NOLINT
  SignalFunction(std::size_t dim, Evaluator f) : dim_(dim), impl_(std::move(f)) {}

  static SignalFunction zero(std::size_t dim) {
    return SignalFunction(dim, [dim](const Time&) { return Vec<F>(dim, typename F::Scalar(0)); });
  }

  std::size_t dimension() const { return dim_; }
  bool is_polynomial() const { return std::holds_alternative<PiecewisePolynomial<F>>(impl_); }
  const PiecewisePolynomial<F>* polynomial() const { return std::get_if<PiecewisePolynomial<F>>(&impl_); }

  Vec<F> operator()(const Time& t) const {
    if (const auto* p = polynomial()) return p->evaluate(t);
    const auto* f = std::get_if<Evaluator>(&impl_);
    if (f == nullptr || !*f) throw Error(ErrorKind::invalid_argument, "signal is not set");
    Vec<F> v = (*f)(t);
    if (v.size() != dim_) throw Error(ErrorKind::dimension_mismatch, "signal evaluator returned wrong dimension");
    return v;
  }

 private:
  std::size_t dim_ = 0;
  std::variant<std::monostate, PiecewisePolynomial<F>, Evaluator> impl_;
};

}  // namespace reldiff
