#include "reldiff/delay_structure.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "reldiff/error.hpp"
#include "reldiff/linalg.hpp"

namespace reldiff {

BasisValue BasisValue::rational(const Rational& q) { return {to_double(q), q}; }

BasisValue BasisValue::real(double value) { return {value, std::nullopt}; }

DelayBasis::DelayBasis(std::vector<BasisValue> values, bool independence_declared)
    : values_(std::move(values)), independence_declared_(independence_declared) {
  if (values_.empty()) throw Error(ErrorKind::invalid_argument, "delay basis must not be empty");
  all_exact_ = true;
  for (const auto& v : values_) {
    if (!(v.numeric > 0.0) || !std::isfinite(v.numeric) || (v.exact && sgn(*v.exact) <= 0)) {
      throw Error(ErrorKind::non_positive_basis, "basis values must be strictly positive");
    }
    all_exact_ = all_exact_ && v.is_exact();
  }
}

double DelayBasis::min_value() const {
  double m = values_.front().numeric;
  for (const auto& v : values_) m = std::min(m, v.numeric);
  return m;
}

double DelayBasis::evaluate(std::span<const std::int64_t> coeffs) const {
  double t = 0.0;
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    if (coeffs[k] != 0) t += static_cast<double>(coeffs[k]) * values_[k].numeric;
  }
  return t;
}

std::optional<Rational> DelayBasis::evaluate_exact(std::span<const std::int64_t> coeffs) const {
  Rational t = 0;
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    if (coeffs[k] == 0) continue;
    if (!values_[k].exact) return std::nullopt;
    t += Rational(BigInt(std::to_string(coeffs[k]))) * *values_[k].exact;
  }
  return t;
}

LatticePoint::LatticePoint(IntVector values) : n(std::move(values)) {
  for (auto v : n) {
    if (v < 0) throw Error(ErrorKind::invalid_argument, "lattice points must be nonnegative");
  }
}

std::int64_t LatticePoint::l1() const { return std::accumulate(n.begin(), n.end(), std::int64_t{0}); }

RealTime RealTime::from_double(double v) {
  if (!std::isfinite(v)) throw Error(ErrorKind::invalid_argument, "time must be finite");
  return {v, rational_from_double(v)};
}

RealTime RealTime::from_rational(const Rational& q) { return {to_double(q), q}; }

RealTime RealTime::parse(std::string_view text) {
  auto q = parse_exact_decimal(text);
  if (!q) throw Error(ErrorKind::rational_parse_error, "cannot parse time '" + std::string(text) + "'");
  return from_rational(*q);
}

std::string RealTime::to_string() const {
  return exact ? reldiff::to_string(*exact) : format_real(value);
}

double bound_value(const TimeBound& bound) {
  return std::visit([](const auto& b) {
    if constexpr (std::is_same_v<std::decay_t<decltype(b)>, TimeStamp>) {
      return b.numeric;
    } else {
      return b.value;
    }
  }, bound);
}

double time_tolerance(double scale) { return 1e-9 * std::max(1.0, std::abs(scale)); }

namespace {

// Floating differences larger than this (relative) cannot be round-off.
constexpr double kSafeGap = 1e-7;

Side side_of(int sign) {
  if (sign < 0) return Side::below;
  if (sign > 0) return Side::above;
  return Side::on;
}

int sign_of(double v) { return (v > 0) - (v < 0); }

}  // namespace

DelayVector::DelayVector(DelayBasis basis, IntMatrix m) : basis_(std::move(basis)), m_(std::move(m)) {
  if (m_.rows() == 0) throw Error(ErrorKind::invalid_argument, "delay vector must have at least one delay");
  if (m_.cols() != basis_.size()) {
    throw Error(ErrorKind::dimension_mismatch, "delay matrix has " + std::to_string(m_.cols()) +
                                                   " columns but the basis has " + std::to_string(basis_.size()));
  }
  for (std::size_t j = 0; j < m_.rows(); ++j) {
    bool nonzero = false;
    for (auto v : m_.row(j)) {
      if (v < 0) throw Error(ErrorKind::invalid_argument, "delay matrix entries must be nonnegative");
      nonzero = nonzero || v != 0;
    }
    if (!nonzero) throw Error(ErrorKind::zero_delay, "delay " + std::to_string(j + 1) + " is zero");
  }
  const auto q = m_.map([](std::int64_t v) { return Rational(BigInt(std::to_string(v))); });
  if (exact_column_rank(q).rank != basis_.size()) {
    throw Error(ErrorKind::rank_deficient_basis, "delay matrix does not use every basis element independently");
  }
}

TimeStamp DelayVector::delay(std::size_t j) const {
  return stamp(IntVector(m_.row(j).begin(), m_.row(j).end()));
}

std::optional<Rational> DelayVector::exact_delay(std::size_t j) const { return exact_time(delay(j)); }

std::vector<double> DelayVector::values() const {
  std::vector<double> out;
  for (std::size_t j = 0; j < size(); ++j) out.push_back(delay_value(j));
  return out;
}

std::size_t DelayVector::argmax_delay() const {
  std::size_t best = 0;
  for (std::size_t j = 1; j < size(); ++j) {
    if (compare(delay(j), delay(best)) == std::strong_ordering::greater) best = j;
  }
  return best;
}

std::size_t DelayVector::argmin_delay() const {
  std::size_t best = 0;
  for (std::size_t j = 1; j < size(); ++j) {
    if (compare(delay(j), delay(best)) == std::strong_ordering::less) best = j;
  }
  return best;
}

ClassKey DelayVector::class_key(const LatticePoint& n) const {
  if (n.size() != size()) throw Error(ErrorKind::dimension_mismatch, "lattice point length differs from N");
  ClassKey key{IntVector(basis_size(), 0)};
  for (std::size_t j = 0; j < size(); ++j) {
    if (n.n[j] == 0) continue;
    for (std::size_t k = 0; k < basis_size(); ++k) key.c[k] += n.n[j] * m_(j, k);
  }
  return key;
}

TimeStamp DelayVector::stamp(IntVector coeffs) const {
  if (coeffs.size() != basis_size()) throw Error(ErrorKind::dimension_mismatch, "time stamp length differs from h");
  const double v = basis_.evaluate(coeffs);
  return {std::move(coeffs), v};
}

Placement DelayVector::place(const TimeStamp& t, const TimeBound& bound) const {
  if (const auto* b = std::get_if<TimeStamp>(&bound)) {
    if (t.coeffs == b->coeffs) return {Side::on, false};
    const double diff = t.numeric - b->numeric;
    const double scale = std::max({1.0, std::abs(t.numeric), std::abs(b->numeric)});
    if (std::abs(diff) > kSafeGap * scale) return {side_of(sign_of(diff)), false};
    const auto et = exact_time(t);
    const auto eb = exact_time(*b);
    if (et && eb) return {side_of(cmp(*et, *eb)), false};
    // Distinct coefficient vectors over an independent basis never coincide,
    // so the floating sign decides; flag it when it is within round-off.
    return {side_of(sign_of(diff)), std::abs(diff) <= time_tolerance(scale)};
  }
  const auto& r = std::get<RealTime>(bound);
  const double diff = t.numeric - r.value;
  const double scale = std::max({1.0, std::abs(t.numeric), std::abs(r.value)});
  if (std::abs(diff) > kSafeGap * scale) return {side_of(sign_of(diff)), false};
  if (r.exact) {
    if (const auto et = exact_time(t)) return {side_of(cmp(*et, *r.exact)), false};
  }
  if (std::abs(diff) <= time_tolerance(r.value)) return {Side::on, true};
  return {side_of(sign_of(diff)), false};
}

std::strong_ordering DelayVector::compare(const TimeStamp& a, const TimeStamp& b) const {
  if (a.coeffs == b.coeffs) return std::strong_ordering::equal;
  const Placement p = place(a, TimeBound{b});
  if (p.side == Side::below) return std::strong_ordering::less;
  if (p.side == Side::above) return std::strong_ordering::greater;
  return a.coeffs <=> b.coeffs;
}

RealTime DelayVector::difference(const TimeStamp& later, const TimeStamp& earlier) const {
  const auto a = exact_time(later);
  const auto b = exact_time(earlier);
  if (a && b) return RealTime::from_rational(*a - *b);
  IntVector diff(basis_size());
  double v = 0.0;
  for (std::size_t k = 0; k < basis_size(); ++k) {
    diff[k] = later.coeffs[k] - earlier.coeffs[k];
    v += static_cast<double>(diff[k]) * basis_[k].numeric;
  }
  return {v, std::nullopt};
}

DelayVector make_delay_vector(DelayBasis basis, IntMatrix m) { return DelayVector(std::move(basis), std::move(m)); }

DelayVector normalize_delays(const std::vector<BasisValue>& values, const Matrix<Rational>& m,
                             bool independence_declared) {
  if (m.cols() != values.size()) throw Error(ErrorKind::dimension_mismatch, "delay matrix columns differ from basis size");
  for (const auto& q : m.data()) {
    if (sgn(q) < 0) throw Error(ErrorKind::invalid_argument, "delay matrix entries must be nonnegative");
  }
  const std::size_t n = m.rows();
  std::vector<BasisValue> basis;
  std::vector<IntVector> columns;

  auto to_int64 = [](const BigInt& z) {
    if (!z.fits_slong_p()) throw Error(ErrorKind::invalid_argument, "delay coefficient out of range");
    return static_cast<std::int64_t>(z.get_si());
  };

  // All exact basis elements collapse into one rational generator g = gcd of the rational parts.
  std::vector<Rational> rational_part(n, Rational(0));
  bool any_exact = false;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (!values[k].exact) continue;
    any_exact = true;
    for (std::size_t j = 0; j < n; ++j) rational_part[j] += m(j, k) * *values[k].exact;
  }
  if (any_exact && std::any_of(rational_part.begin(), rational_part.end(), [](const Rational& q) { return sgn(q) != 0; })) {
    BigInt den = 1;
    for (const auto& q : rational_part) den = lcm(den, BigInt(q.get_den()));
    BigInt g = 0;
    std::vector<BigInt> scaled;
    for (const auto& q : rational_part) {
      scaled.push_back(BigInt(q * Rational(den)));
      g = gcd(g, scaled.back());
    }
    Rational generator(g, den);
    generator.canonicalize();
    basis.push_back(BasisValue::rational(generator));
    IntVector col;
    for (const auto& s : scaled) col.push_back(to_int64(s / g));
    columns.push_back(std::move(col));
  }
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (values[k].exact) continue;
    BigInt den = 1;
    for (std::size_t j = 0; j < n; ++j) den = lcm(den, BigInt(m(j, k).get_den()));
    basis.push_back(BasisValue::real(values[k].numeric / den.get_d()));
    IntVector col;
    for (std::size_t j = 0; j < n; ++j) col.push_back(to_int64(BigInt(m(j, k) * Rational(den))));
    columns.push_back(std::move(col));
  }
  if (basis.empty()) throw Error(ErrorKind::zero_delay, "all delays are zero");
  IntMatrix out(n, basis.size());
  for (std::size_t k = 0; k < columns.size(); ++k) {
    for (std::size_t j = 0; j < n; ++j) out(j, k) = columns[k][j];
  }
  return DelayVector(DelayBasis(std::move(basis), independence_declared), std::move(out));
}

ClassKey class_key(const DelayVector& delays, const LatticePoint& n) { return delays.class_key(n); }

TimeStamp time_of(const DelayVector& delays, const LatticePoint& n) { return delays.time_of(n); }

TimeStamp scale(const DelayVector& delays, const TimeStamp& t, std::int64_t factor) {
  IntVector c = t.coeffs;
  for (auto& v : c) v *= factor;
  return delays.stamp(std::move(c));
}

TimeStamp add(const DelayVector& delays, const TimeStamp& a, const TimeStamp& b) {
  IntVector c = a.coeffs;
  for (std::size_t k = 0; k < c.size(); ++k) c[k] += b.coeffs[k];
  return delays.stamp(std::move(c));
}

namespace {

struct Enumerator {
  const DelayVector& delays;
  const TimeBound& bound;
  bool strict;
  LatticeEnumeration out;
  std::set<IntVector> ambiguous_seen;
  IntVector current;

  void note_ambiguous(const TimeStamp& t) {
    if (ambiguous_seen.insert(t.coeffs).second) out.ambiguous.push_back(t);
  }

  void visit(std::size_t j, IntVector coeffs) {
    const std::size_t n = delays.size();
    if (j == n) {
      TimeStamp t = delays.stamp(std::move(coeffs));
      const Placement p = delays.place(t, bound);
      if (p.ambiguous) note_ambiguous(t);
      if (strict ? p.strictly_below() : p.at_or_below()) {
        out.points.emplace_back(current);
        out.keys.push_back(ClassKey{t.coeffs});
      }
      return;
    }
    for (std::int64_t v = 0;; ++v) {
      current[j] = v;
      IntVector c = coeffs;
      for (std::size_t k = 0; k < c.size(); ++k) c[k] += v * delays.matrix()(j, k);
      const Placement p = delays.place(delays.stamp(c), bound);
      if (p.side == Side::above) break;
      visit(j + 1, std::move(c));
    }
    current[j] = 0;
  }
};

}  // namespace

LatticeEnumeration enumerate_lattice_points(const DelayVector& delays, const TimeBound& bound, bool strict) {
  if (bound_value(bound) < 0.0) throw Error(ErrorKind::invalid_argument, "time horizon must be nonnegative");
  Enumerator e{delays, bound, strict, {}, {}, IntVector(delays.size(), 0)};
  e.visit(0, IntVector(delays.basis_size(), 0));
  return std::move(e.out);
}

ClassEnumeration enumerate_classes(const DelayVector& delays, const TimeBound& bound, bool strict) {
  LatticeEnumeration points = enumerate_lattice_points(delays, bound, strict);
  ClassEnumeration out;
  out.ambiguous = std::move(points.ambiguous);
  std::map<ClassKey, std::size_t> seen;
  for (std::size_t i = 0; i < points.points.size(); ++i) {
    // Depth-first order visits points lexicographically, so the first member is the smallest.
    if (seen.emplace(points.keys[i], out.classes.size()).second) {
      out.classes.push_back({points.keys[i], points.points[i], delays.time_of(points.keys[i])});
    }
  }
  std::sort(out.classes.begin(), out.classes.end(), [&](const ClassEntry& a, const ClassEntry& b) {
    const auto c = delays.compare(a.time, b.time);
    if (c != std::strong_ordering::equal) return c == std::strong_ordering::less;
    return a.key < b.key;
  });
  return out;
}

namespace {

Matrix<Rational> rational_matrix(const IntMatrix& m) {
  return m.map([](std::int64_t v) { return Rational(BigInt(std::to_string(v))); });
}

}  // namespace

bool preorder_leq(const DelayVector& lambda, const DelayVector& l) {
  if (lambda.size() != l.size()) {
    throw Error(ErrorKind::dimension_mismatch, "delay vectors have different lengths");
  }
  const auto ml = rational_matrix(lambda.matrix());
  const auto mL = rational_matrix(l.matrix());
  const std::vector<Matrix<Rational>> blocks{ml, mL};
  return exact_column_rank(hstack(blocks, lambda.size())).rank == exact_column_rank(ml).rank;
}

bool preorder_equivalent(const DelayVector& a, const DelayVector& b) { return preorder_leq(a, b) && preorder_leq(b, a); }

namespace {

std::int64_t floor_scaled(const BasisValue& v, std::int64_t n) {
  if (v.exact) {
    const Rational q = *v.exact * Rational(BigInt(std::to_string(n)));
    BigInt f;
    mpz_fdiv_q(f.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    return static_cast<std::int64_t>(f.get_si());
  }
  return static_cast<std::int64_t>(std::floor(static_cast<double>(n) * v.numeric));
}

}  // namespace

DelayVector commensurable_approx(const DelayVector& delays, std::int64_t n) {
  if (n <= 0) throw Error(ErrorKind::invalid_argument, "approximation order must be positive");
  IntVector floors;
  for (const auto& v : delays.basis().values()) {
    floors.push_back(floor_scaled(v, n));
    if (floors.back() <= 0) {
      throw Error(ErrorKind::approx_not_positive,
                  "order " + std::to_string(n) + " is too small for basis value " + format_real(v.numeric));
    }
  }
  IntMatrix m(delays.size(), 1);
  for (std::size_t j = 0; j < delays.size(); ++j) {
    for (std::size_t k = 0; k < delays.basis_size(); ++k) m(j, 0) += delays.matrix()(j, k) * floors[k];
  }
  return DelayVector(DelayBasis({BasisValue::rational(make_rational(1, n))}), std::move(m));
}

SurrogateResult commensurable_surrogate(const DelayVector& delays, const RealTime& horizon, double eps,
                                        std::int64_t max_iterations) {
  if (!(eps > 0.0)) throw Error(ErrorKind::invalid_argument, "epsilon must be positive");
  if (horizon.value < 0.0) throw Error(ErrorKind::invalid_argument, "time horizon must be nonnegative");
  if (delays.commensurable()) return {delays, 0};

  // Class keys of every point with Lambda.n <= (1 + eps) T. The L-key of a point
  // is <c, floor(n ell)>, so only distinct c values need to stay distinct.
  RealTime widened{horizon.value * (1.0 + eps), std::nullopt};
  if (horizon.exact) widened = RealTime::from_rational(*horizon.exact * rational_from_double(1.0 + eps));
  const ClassEnumeration classes = enumerate_classes(delays, TimeBound{widened}, false);

  const std::int64_t first = static_cast<std::int64_t>(std::ceil(1.0 / delays.basis().min_value()));
  const std::vector<double> lambda = delays.values();
  for (std::int64_t n = std::max<std::int64_t>(1, first), it = 0; it < max_iterations; ++n, ++it) {
    IntVector floors;
    bool positive = true;
    for (const auto& v : delays.basis().values()) {
      floors.push_back(floor_scaled(v, n));
      positive = positive && floors.back() > 0;
    }
    if (!positive) continue;
    bool ratios_ok = true;
    for (std::size_t j = 0; j < delays.size() && ratios_ok; ++j) {
      std::int64_t num = 0;
      for (std::size_t k = 0; k < delays.basis_size(); ++k) num += delays.matrix()(j, k) * floors[k];
      const double lj = static_cast<double>(num) / static_cast<double>(n);
      ratios_ok = lambda[j] < (1.0 + eps) * lj;
    }
    if (!ratios_ok) continue;
    std::set<std::int64_t> l_keys;
    bool injective = true;
    for (const auto& c : classes.classes) {
      std::int64_t key = 0;
      for (std::size_t k = 0; k < floors.size(); ++k) key += c.key.c[k] * floors[k];
      if (!l_keys.insert(key).second) {
        injective = false;
        break;
      }
    }
    if (!injective) continue;
    return {commensurable_approx(delays, n), n};
  }
  throw Error(ErrorKind::surrogate_search_exceeded,
              "no commensurable surrogate within " + std::to_string(max_iterations) + " candidates");
}

RealTime epsilon0(const DelayVector& delays, const TimeBound& horizon) {
  const TimeStamp lmax = delays.delay(delays.argmax_delay());
  TimeBound extended;
  if (const auto* t = std::get_if<TimeStamp>(&horizon)) {
    extended = add(delays, *t, lmax);
  } else {
    const auto& r = std::get<RealTime>(horizon);
    const auto el = delays.exact_time(lmax);
    extended = (r.exact && el) ? RealTime::from_rational(*r.exact + *el) : RealTime{r.value + lmax.numeric, std::nullopt};
  }
  const ClassEnumeration classes = enumerate_classes(delays, extended, false);

  std::optional<RealTime> best;
  auto consider = [&](const RealTime& candidate) {
    const bool smaller = !best || (candidate.exact && best->exact ? *candidate.exact < *best->exact
                                                                  : candidate.value < best->value);
    if (smaller) best = candidate;
  };
  const TimeStamp* previous = nullptr;
  for (const auto& c : classes.classes) {
    const Placement p = delays.place(c.time, horizon);
    if (p.at_or_below()) {
      if (previous) consider(delays.difference(c.time, *previous));
      previous = &c.time;
      continue;
    }
    // First class strictly beyond the horizon.
    if (const auto* t = std::get_if<TimeStamp>(&horizon)) {
      consider(delays.difference(c.time, *t));
    } else {
      const auto& r = std::get<RealTime>(horizon);
      const auto et = delays.exact_time(c.time);
      consider(et && r.exact ? RealTime::from_rational(*et - *r.exact) : RealTime{c.time.numeric - r.value, std::nullopt});
    }
    break;
  }
  return *best;
}

std::string to_string(const TimeStamp& t, const DelayVector& delays) {
  if (const auto e = delays.exact_time(t)) return to_string(*e);
  return format_real(t.numeric);
}

}  // namespace reldiff
