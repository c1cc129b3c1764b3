#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "reldiff/coefficients.hpp"
#include "reldiff/delay_structure.hpp"
#include "reldiff/linalg.hpp"

namespace reldiff {

/// How ranks of generator stacks are computed.
struct RankBackend {
  ScalarMode mode = ScalarMode::exact;
  std::optional<double> tolerance;  // relative singular value threshold, numeric only

  static RankBackend exact() { return {ScalarMode::exact, std::nullopt}; }
  static RankBackend numeric(std::optional<double> tolerance = std::nullopt);
  /// Numeric backend honouring RELDIFF_RANK_TOL when set.
  static RankBackend from_environment(ScalarMode mode);
};

/// Rank of [G_1 | G_2 | ...] for d-row blocks. A numeric system cannot be
/// ranked exactly (MixedScalarMode); exact blocks are converted for numeric ranks.
ColumnRank rank_of_span(std::span<const Matrix<Complex>> blocks, std::size_t d, const RankBackend& backend);
ColumnRank rank_of_span(std::span<const Matrix<ExactComplex>> blocks, std::size_t d, const RankBackend& backend);

struct ControllabilityReport {
  bool controllable = false;
  std::size_t rank = 0;
  std::size_t dimension = 0;
  std::size_t generators_used = 0;  // classes contributing blocks
  bool strict = false;
  std::vector<ClassKey> class_keys;
  std::vector<TimeStamp> class_times;
  /// (class index, input column) pairs whose generator columns form a basis of C^d.
  std::vector<std::pair<std::size_t, std::size_t>> certificate;
  std::vector<TimeStamp> ambiguous;

  bool ambiguous_boundary() const { return !ambiguous.empty(); }
};

/// Span of class-sum blocks with Lambda.n <= T equals C^d.
template <class S>
ControllabilityReport is_relatively_controllable(const DelaySystem<S>& system, const TimeBound& t,
                                                  const RankBackend& backend);

/// Same with Lambda.n < T (the criterion for smooth controls).
template <class S>
ControllabilityReport ck_rank_condition(const DelaySystem<S>& system, const TimeBound& t, const RankBackend& backend);

template <class S>
ControllabilityReport report_from_generators(const GeneratorSet<S>& set, std::size_t d, bool strict,
                                             const RankBackend& backend);

/// (d - 1) Lambda_max as an exact stamp.
TimeStamp saturation_time(const DelayVector& delays, std::size_t d);

struct MinimalTimeResult {
  bool controllable = false;
  std::optional<TimeStamp> t_min;
  ControllabilityReport report;
};

/// Smallest class time at which the span is full, searched up to (d - 1) Lambda_max.
template <class S>
MinimalTimeResult minimal_controllability_time(const DelaySystem<S>& system, const RankBackend& backend);

template <class S>
ControllabilityReport controllable_some_time(const DelaySystem<S>& system, const RankBackend& backend);

template <class S>
struct AugmentedSystem {
  Matrix<S> a_hat;  // Kd x Kd
  Matrix<S> b_hat;  // Kd x m
  Matrix<S> c_hat;  // d x Kd
  BasisValue lambda;
  std::vector<std::int64_t> k;
  std::size_t big_k = 0;
};

/// Single-delay reformulation for Lambda = lambda (k_1, ..., k_N).
template <class S>
AugmentedSystem<S> augmented_system(const DelaySystem<S>& system);

/// Kalman rank of C^ A^i B^ for i = 0 .. floor(T / lambda).
template <class S>
ControllabilityReport kalman_augmented_check(const DelaySystem<S>& system, const TimeBound& t,
                                             const RankBackend& backend);

struct TransferResult {
  RealTime kappa;
  RealTime scaled_time;  // kappa * T
  ControllabilityReport other_report;
  std::optional<ControllabilityReport> report;  // for Lambda at kappa T, when the other system is controllable
};

/// Given Lambda <= L: if (A, B, L) is controllable at T then (A, B, Lambda) is at kappa T.
/// A false verdict for Lambda raises TheoremViolation.
template <class S>
TransferResult transfer_controllability(const DelaySystem<S>& system, const DelayVector& other, const RealTime& t,
                                        const RankBackend& backend);

/// max_j Lambda_j / L_j.
RealTime delay_ratio(const DelayVector& lambda, const DelayVector& l);

/// Span of class sums (for Lambda) over points with L.n <= (d - 1) L_max.
template <class S>
ControllabilityReport reduced_generator_check(const DelaySystem<S>& system, const DelayVector& other,
                                              const RankBackend& backend);

}  // namespace reldiff
