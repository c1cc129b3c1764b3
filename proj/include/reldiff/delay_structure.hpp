#pragma once

// Delay vectors written over a declared rationally independent basis,
// Lambda = M * ell with M a nonnegative integer matrix. All class logic works
// on the integer coefficient vectors; floating values are only used to order
// classes whose coefficient vectors differ.

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "reldiff/matrix.hpp"
#include "reldiff/scalar.hpp"

namespace reldiff {

using IntMatrix = Matrix<std::int64_t>;
using IntVector = std::vector<std::int64_t>;

/// One basis element: its floating value and, when known, its exact rational value.
struct BasisValue {
  double numeric = 0.0;
  std::optional<Rational> exact;

  static BasisValue rational(const Rational& q);
  static BasisValue real(double value);
  bool is_exact() const { return exact.has_value(); }
};

class DelayBasis {
 public:
  explicit DelayBasis(std::vector<BasisValue> values, bool independence_declared = true);

  std::size_t size() const { return values_.size(); }
  const BasisValue& operator[](std::size_t k) const { return values_[k]; }
  const std::vector<BasisValue>& values() const { return values_; }
  bool independence_declared() const { return independence_declared_; }
  bool all_exact() const { return all_exact_; }
  double min_value() const;

  double evaluate(std::span<const std::int64_t> coeffs) const;
  std::optional<Rational> evaluate_exact(std::span<const std::int64_t> coeffs) const;

 private:
  std::vector<BasisValue> values_;
  bool independence_declared_ = true;
  bool all_exact_ = false;
};

struct LatticePoint {
  IntVector n;

  LatticePoint() = default;
  explicit LatticePoint(IntVector values);
  std::size_t size() const { return n.size(); }
  std::int64_t l1() const;
  friend auto operator<=>(const LatticePoint&, const LatticePoint&) = default;
};

/// c = M^T n. Two lattice points share a key iff they share a delay combination.
struct ClassKey {
  IntVector c;
  friend auto operator<=>(const ClassKey&, const ClassKey&) = default;
};

/// Nonnegative integer combination of basis values plus its floating value.
struct TimeStamp {
  IntVector coeffs;
  double numeric = 0.0;

  friend bool operator==(const TimeStamp& a, const TimeStamp& b) { return a.coeffs == b.coeffs; }
};

/// A user-supplied real instant, exact when given as a rational literal.
struct RealTime {
  double value = 0.0;
  std::optional<Rational> exact;

  static RealTime from_double(double v);
  static RealTime from_rational(const Rational& q);
  /// Accepts "p/q", integers and decimal literals (parsed exactly).
  static RealTime parse(std::string_view text);
  std::string to_string() const;
};

using TimeBound = std::variant<TimeStamp, RealTime>;

double bound_value(const TimeBound& bound);

/// Tolerance for comparisons of floating times against a user-supplied real.
double time_tolerance(double scale);

enum class Side { below, on, above };

struct Placement {
  Side side = Side::on;
  bool ambiguous = false;

  bool at_or_below() const { return side != Side::above; }
  bool strictly_below() const { return side == Side::below; }
};

class DelayVector {
 public:
  DelayVector(DelayBasis basis, IntMatrix m);

  std::size_t size() const { return m_.rows(); }
  std::size_t basis_size() const { return basis_.size(); }
  const DelayBasis& basis() const { return basis_; }
  const IntMatrix& matrix() const { return m_; }
  bool commensurable() const { return basis_size() == 1; }

  TimeStamp delay(std::size_t j) const;
  double delay_value(std::size_t j) const { return delay(j).numeric; }
  std::optional<Rational> exact_delay(std::size_t j) const;
  std::vector<double> values() const;
  std::size_t argmax_delay() const;
  std::size_t argmin_delay() const;
  double max_delay() const { return delay_value(argmax_delay()); }
  double min_delay() const { return delay_value(argmin_delay()); }

  ClassKey class_key(const LatticePoint& n) const;
  TimeStamp stamp(IntVector coeffs) const;
  TimeStamp time_of(const LatticePoint& n) const { return stamp(class_key(n).c); }
  TimeStamp time_of(const ClassKey& key) const { return stamp(key.c); }
  std::optional<Rational> exact_time(const TimeStamp& t) const { return basis_.evaluate_exact(t.coeffs); }

  /// Where `t` lies relative to `bound`. Exact when both sides are exact or the
  /// bound is itself a coefficient vector over this basis.
  Placement place(const TimeStamp& t, const TimeBound& bound) const;

  /// Total order on time stamps (exact where possible, ties broken by key).
  std::strong_ordering compare(const TimeStamp& a, const TimeStamp& b) const;

  /// t2 - t1 as a real number (exact when the basis is exact).
  RealTime difference(const TimeStamp& later, const TimeStamp& earlier) const;

 private:
  DelayBasis basis_;
  IntMatrix m_;
};

/// Validates M against the basis (no zero row, nonnegative, rank h).
DelayVector make_delay_vector(DelayBasis basis, IntMatrix m);

/// Builds a delay vector from rational combinations of basis values: exact
/// rational basis entries are merged into a single rational generator and
/// column denominators are cleared into the basis.
DelayVector normalize_delays(const std::vector<BasisValue>& values, const Matrix<Rational>& m,
                             bool independence_declared = true);

ClassKey class_key(const DelayVector& delays, const LatticePoint& n);
TimeStamp time_of(const DelayVector& delays, const LatticePoint& n);

/// Multiplies every coefficient of a stamp by `factor`.
TimeStamp scale(const DelayVector& delays, const TimeStamp& t, std::int64_t factor);
TimeStamp add(const DelayVector& delays, const TimeStamp& a, const TimeStamp& b);

struct LatticeEnumeration {
  std::vector<LatticePoint> points;
  std::vector<ClassKey> keys;  // parallel to points
  std::vector<TimeStamp> ambiguous;
};

/// All n in N^N with Lambda.n <= bound (or < bound when strict), in depth-first
/// order over n_1, n_2, ...
LatticeEnumeration enumerate_lattice_points(const DelayVector& delays, const TimeBound& bound, bool strict);

struct ClassEntry {
  ClassKey key;
  LatticePoint representative;
  TimeStamp time;
};

struct ClassEnumeration {
  std::vector<ClassEntry> classes;  // sorted by (time, key)
  std::vector<TimeStamp> ambiguous;

  bool has_ambiguity() const { return !ambiguous.empty(); }
};

ClassEnumeration enumerate_classes(const DelayVector& delays, const TimeBound& bound, bool strict);

/// Lambda preceq L: Z(Lambda) is contained in Z(L), i.e. range(M_L) lies in range(M_Lambda).
bool preorder_leq(const DelayVector& lambda, const DelayVector& l);
bool preorder_equivalent(const DelayVector& a, const DelayVector& b);

/// L^(n) = (1/n) M floor(n ell), over the single rational basis 1/n.
DelayVector commensurable_approx(const DelayVector& delays, std::int64_t n);

struct SurrogateResult {
  DelayVector delays;
  std::int64_t n = 0;  // 0 when the input was already commensurable
};

/// Smallest L^(n) with 1 <= Lambda_j / L_j < 1 + eps preserving the class
/// structure of every point with Lambda.n <= horizon.
SurrogateResult commensurable_surrogate(const DelayVector& delays, const RealTime& horizon, double eps,
                                        std::int64_t max_iterations = 1'000'000);

/// Smallest gap between distinct class times <= T, or the overshoot of the first
/// class time beyond T, whichever is smaller.
RealTime epsilon0(const DelayVector& delays, const TimeBound& horizon);

std::string to_string(const TimeStamp& t, const DelayVector& delays);

}  // namespace reldiff
