#pragma once

// Coefficient matrices Xi_n (indexed by lattice points) and their class sums
// over points sharing a delay combination.

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "reldiff/delay_structure.hpp"
#include "reldiff/matrix.hpp"
#include "reldiff/scalar.hpp"

namespace reldiff {

template <class S>
struct SystemMatrices {
  std::vector<Matrix<S>> a;  // N square d x d matrices
  Matrix<S> b;               // d x m

  std::size_t d() const { return b.rows(); }
  std::size_t m() const { return b.cols(); }
  std::size_t n_delays() const { return a.size(); }

  /// Throws DimensionMismatch unless every A_j is d x d.
  void validate() const;
};

SystemMatrices<Complex> to_numeric(const SystemMatrices<ExactComplex>& s);

/// A system as loaded from input: always has a numeric form, and an exact form
/// when every entry was given as a rational.
struct SystemSpec {
  ScalarMode mode = ScalarMode::numeric;
  std::optional<SystemMatrices<ExactComplex>> exact_matrices;
  SystemMatrices<Complex> numeric_matrices;

  static SystemSpec from_exact(SystemMatrices<ExactComplex> m);
  static SystemSpec from_numeric(SystemMatrices<Complex> m);

  std::size_t d() const { return numeric_matrices.d(); }
  std::size_t m() const { return numeric_matrices.m(); }
  std::size_t n_delays() const { return numeric_matrices.n_delays(); }

  /// Throws MixedScalarMode when the system has no exact representation.
  const SystemMatrices<ExactComplex>& exact() const;
  const SystemMatrices<Complex>& numeric() const { return numeric_matrices; }
};

/// Memoized Xi_n. Thread-safe; entries are filled bottom-up so the recursion
/// depth never grows with |n|.
template <class S>
class XiTable {
 public:
  explicit XiTable(std::vector<Matrix<S>> a);

  std::size_t dimension() const { return d_; }
  std::size_t n_delays() const { return a_.size(); }
  const std::vector<Matrix<S>>& matrices() const { return a_; }

  /// Zero when any entry is negative, identity at n = 0, otherwise sum_k A_k Xi_{n - e_k}.
  Matrix<S> xi(const IntVector& n) const;
  std::size_t cached_entries() const;

 private:
  const Matrix<S>& lookup_locked(const IntVector& n) const;

  std::vector<Matrix<S>> a_;
  std::size_t d_;
  Matrix<S> zero_;
  mutable std::mutex mutex_;
  mutable std::map<IntVector, Matrix<S>> cache_;
};

/// Matrices, delays and a Xi cache shared between copies with the same A.
template <class S>
class DelaySystem {
 public:
  DelaySystem(SystemMatrices<S> matrices, DelayVector delays);

  const SystemMatrices<S>& matrices() const { return *matrices_; }
  const DelayVector& delays() const { return delays_; }
  const XiTable<S>& xi_table() const { return *xi_; }
  std::size_t d() const { return matrices_->d(); }
  std::size_t m() const { return matrices_->m(); }
  std::size_t n_delays() const { return matrices_->n_delays(); }

  /// Same matrices (and cache) with another delay vector of equal length.
  DelaySystem with_delays(DelayVector delays) const;

 private:
  std::shared_ptr<const SystemMatrices<S>> matrices_;
  DelayVector delays_;
  std::shared_ptr<XiTable<S>> xi_;
};

/// Lattice points whose key equals `key` (exact integer search, no floating point).
std::vector<LatticePoint> class_members(const DelayVector& delays, const ClassKey& key);

/// Class sum over all members of `key`. The horizon overload rejects classes
/// later than the horizon with ClassBeyondHorizon.
template <class S>
Matrix<S> xi_hat(const XiTable<S>& table, const DelayVector& delays, const ClassKey& key);
template <class S>
Matrix<S> xi_hat(const XiTable<S>& table, const DelayVector& delays, const ClassKey& key, const TimeBound& horizon);

template <class S>
struct XiHatEntry {
  ClassKey key;
  LatticePoint representative;
  TimeStamp time;
  Matrix<S> value;
};

/// All class sums within a horizon, built by grouping enumerated lattice points.
template <class S>
class XiHatTable {
 public:
  XiHatTable(const XiTable<S>& table, const DelayVector& delays, const TimeBound& horizon, bool strict = false);

  const std::vector<XiHatEntry<S>>& entries() const { return entries_; }
  const std::vector<TimeStamp>& ambiguous() const { return ambiguous_; }
  const Matrix<S>& at(const ClassKey& key) const;
  bool contains(const ClassKey& key) const { return index_.count(key) != 0; }

 private:
  std::vector<XiHatEntry<S>> entries_;
  std::vector<TimeStamp> ambiguous_;
  std::map<ClassKey, std::size_t> index_;
};

/// Closed form of the class sums for x(t) = x(t-1) + A x(t-k) + B u(t):
/// sum_{j=0}^{floor(n1/k + n2)} C(n1 + k n2 - j(k-1), j) A^j.
template <class S>
Matrix<S> diblik_xi_hat(const Matrix<S>& a, std::int64_t k, const LatticePoint& n);

template <class S>
struct Generator {
  ClassKey key;
  LatticePoint representative;
  TimeStamp time;
  Matrix<S> block;  // class sum times B, d x m
};

template <class S>
struct GeneratorSet {
  std::vector<Generator<S>> generators;
  std::vector<TimeStamp> ambiguous;
};

/// One block per class with time <= bound (< bound when strict), in time order.
template <class S>
GeneratorSet<S> controllability_generators(const DelaySystem<S>& system, const TimeBound& bound, bool strict);

/// Entrywise zero test; numeric blocks use threshold 1e-12 * max(1, scale).
bool is_negligible(const Matrix<Complex>& m, double scale);
bool is_negligible(const Matrix<ExactComplex>& m, double scale);

double infinity_norm(const Matrix<Complex>& m);

}  // namespace reldiff
