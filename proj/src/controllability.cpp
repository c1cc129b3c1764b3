#include "reldiff/controllability.hpp"

#include <algorithm>
#include <cstdlib>
#include <set>
#include <string>

#include "reldiff/error.hpp"

namespace reldiff {

RankBackend RankBackend::numeric(std::optional<double> tolerance) {
  if (tolerance && !(*tolerance > 0.0 && *tolerance < 1.0)) {
    throw Error(ErrorKind::invalid_argument, "rank tolerance must lie in (0, 1)");
  }
  return {ScalarMode::numeric, tolerance};
}

RankBackend RankBackend::from_environment(ScalarMode mode) {
  if (mode == ScalarMode::exact) return exact();
  const char* env = std::getenv("RELDIFF_RANK_TOL");
  if (env == nullptr || *env == '\0') return numeric();
  char* end = nullptr;
  const double tol = std::strtod(env, &end);
  if (end == env || *end != '\0') {
    throw Error(ErrorKind::invalid_argument, std::string("RELDIFF_RANK_TOL is not a number: ") + env);
  }
  return numeric(tol);
}

namespace {

ColumnRank rank_numeric(const Matrix<Complex>& stacked, const RankBackend& backend) {
  return numeric_column_rank(stacked, backend.tolerance);
}

}  // namespace

ColumnRank rank_of_span(std::span<const Matrix<Complex>> blocks, std::size_t d, const RankBackend& backend) {
  if (backend.mode == ScalarMode::exact) {
    throw Error(ErrorKind::mixed_scalar_mode, "exact rank requested for a system with floating entries");
  }
  if (blocks.empty()) return {};
  return rank_numeric(hstack(blocks, d), backend);
}

ColumnRank rank_of_span(std::span<const Matrix<ExactComplex>> blocks, std::size_t d,
                                      const RankBackend& backend) {
  if (blocks.empty()) return {};
  const Matrix<ExactComplex> stacked = hstack(blocks, d);
  if (backend.mode == ScalarMode::numeric) return rank_numeric(to_numeric(stacked), backend);
  return exact_column_rank(stacked);
}

template <class S>
ControllabilityReport report_from_generators(const GeneratorSet<S>& set, std::size_t d, bool strict,
                                             const RankBackend& backend) {
  ControllabilityReport report;
  report.dimension = d;
  report.strict = strict;
  report.ambiguous = set.ambiguous;
  std::vector<Matrix<S>> blocks;
  std::size_t m = 0;
  for (const auto& g : set.generators) {
    blocks.push_back(g.block);
    report.class_keys.push_back(g.key);
    report.class_times.push_back(g.time);
    m = g.block.cols();
  }
  report.generators_used = blocks.size();
  const ColumnRank cr = rank_of_span(std::span<const Matrix<S>>(blocks), d, backend);
  report.rank = cr.rank;
  report.controllable = cr.rank == d;
  if (report.controllable && m > 0) {
    for (auto col : cr.basis_columns) report.certificate.emplace_back(col / m, col % m);
  }
  return report;
}

template ControllabilityReport report_from_generators(const GeneratorSet<Complex>&, std::size_t, bool,
                                                      const RankBackend&);
template ControllabilityReport report_from_generators(const GeneratorSet<ExactComplex>&, std::size_t, bool,
                                                      const RankBackend&);

template <class S>
ControllabilityReport is_relatively_controllable(const DelaySystem<S>& system, const TimeBound& t,
                                                  const RankBackend& backend) {
  if (bound_value(t) < 0.0) throw Error(ErrorKind::invalid_argument, "time must be nonnegative");
  return report_from_generators(controllability_generators(system, t, false), system.d(), false, backend);
}

template <class S>
ControllabilityReport ck_rank_condition(const DelaySystem<S>& system, const TimeBound& t, const RankBackend& backend) {
  if (!(bound_value(t) > 0.0)) throw Error(ErrorKind::invalid_argument, "time must be positive");
  return report_from_generators(controllability_generators(system, t, true), system.d(), true, backend);
}

TimeStamp saturation_time(const DelayVector& delays, std::size_t d) {
  return scale(delays, delays.delay(delays.argmax_delay()), static_cast<std::int64_t>(d) - 1);
}

template <class S>
MinimalTimeResult minimal_controllability_time(const DelaySystem<S>& system, const RankBackend& backend) {
  const std::size_t d = system.d();
  const GeneratorSet<S> all = controllability_generators(system, saturation_time(system.delays(), d), false);
  std::vector<Matrix<S>> blocks;
  for (const auto& g : all.generators) blocks.push_back(g.block);

  auto prefix_rank = [&](std::size_t count) {
    return rank_of_span(std::span<const Matrix<S>>(blocks.data(), count), d, backend).rank;
  };
  MinimalTimeResult result;
  if (prefix_rank(blocks.size()) < d) {
    result.report = report_from_generators(all, d, false, backend);
    return result;
  }
  // Rank is monotone in the prefix length; find the shortest full prefix.
  std::size_t lo = 1;
  std::size_t hi = blocks.size();
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (prefix_rank(mid) == d) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  result.controllable = true;
  result.t_min = all.generators[lo - 1].time;
  GeneratorSet<S> prefix;
  prefix.generators.assign(all.generators.begin(), all.generators.begin() + static_cast<std::ptrdiff_t>(lo));
  result.report = report_from_generators(prefix, d, false, backend);
  return result;
}

template <class S>
ControllabilityReport controllable_some_time(const DelaySystem<S>& system, const RankBackend& backend) {
  return is_relatively_controllable(system, TimeBound{saturation_time(system.delays(), system.d())}, backend);
}

template <class S>
AugmentedSystem<S> augmented_system(const DelaySystem<S>& system) {
  const DelayVector& delays = system.delays();
  if (!delays.commensurable()) {
    throw Error(ErrorKind::not_commensurable, "augmented system needs delays over a single basis element");
  }
  const std::size_t d = system.d();
  const std::size_t m = system.m();
  AugmentedSystem<S> out;
  out.lambda = delays.basis()[0];
  for (std::size_t j = 0; j < delays.size(); ++j) out.k.push_back(delays.matrix()(j, 0));
  out.big_k = static_cast<std::size_t>(*std::max_element(out.k.begin(), out.k.end()));
  const std::size_t kd = out.big_k * d;
  out.a_hat = Matrix<S>(kd, kd);
  for (std::size_t j = 0; j < out.k.size(); ++j) {
    const std::size_t block = static_cast<std::size_t>(out.k[j]) - 1;
    Matrix<S> current = out.a_hat.block(0, block * d, d, d);
    current += system.matrices().a[j];
    out.a_hat.set_block(0, block * d, current);
  }
  for (std::size_t b = 1; b < out.big_k; ++b) out.a_hat.set_block(b * d, (b - 1) * d, Matrix<S>::identity(d));
  out.b_hat = Matrix<S>(kd, m);
  out.b_hat.set_block(0, 0, system.matrices().b);
  out.c_hat = Matrix<S>(d, kd);
  out.c_hat.set_block(0, 0, Matrix<S>::identity(d));
  return out;
}

template <class S>
ControllabilityReport kalman_augmented_check(const DelaySystem<S>& system, const TimeBound& t,
                                             const RankBackend& backend) {
  const AugmentedSystem<S> aug = augmented_system(system);
  const DelayVector& delays = system.delays();
  GeneratorSet<S> set;
  Matrix<S> power_b = aug.b_hat;
  for (std::int64_t i = 0;; ++i) {
    const TimeStamp stamp = delays.stamp({i});
    const Placement p = delays.place(stamp, t);
    if (p.ambiguous) set.ambiguous.push_back(stamp);
    if (!p.at_or_below()) break;
    set.generators.push_back({ClassKey{{i}}, LatticePoint{}, stamp, aug.c_hat * power_b});
    power_b = aug.a_hat * power_b;
  }
  return report_from_generators(set, system.d(), false, backend);
}

RealTime delay_ratio(const DelayVector& lambda, const DelayVector& l) {
  if (lambda.size() != l.size()) throw Error(ErrorKind::dimension_mismatch, "delay vectors have different lengths");
  std::optional<RealTime> best;
  for (std::size_t j = 0; j < lambda.size(); ++j) {
    const auto a = lambda.exact_delay(j);
    const auto b = l.exact_delay(j);
    RealTime r = (a && b) ? RealTime::from_rational(*a / *b)
                          : RealTime{lambda.delay_value(j) / l.delay_value(j), std::nullopt};
    const bool larger = !best || ((r.exact && best->exact) ? *r.exact > *best->exact : r.value > best->value);
    if (larger) best = r;
  }
  return *best;
}

template <class S>
TransferResult transfer_controllability(const DelaySystem<S>& system, const DelayVector& other, const RealTime& t,
                                        const RankBackend& backend) {
  if (!preorder_leq(system.delays(), other)) {
    throw Error(ErrorKind::not_comparable, "the delay vectors are not ordered: Z(Lambda) is not contained in Z(L)");
  }
  TransferResult result;
  result.kappa = delay_ratio(system.delays(), other);
  result.scaled_time = (result.kappa.exact && t.exact) ? RealTime::from_rational(*result.kappa.exact * *t.exact)
                                                       : RealTime{result.kappa.value * t.value, std::nullopt};
  const DelaySystem<S> l_system = system.with_delays(other);
  result.other_report = is_relatively_controllable(l_system, TimeBound{t}, backend);
  if (!result.other_report.controllable) return result;
  result.report = is_relatively_controllable(system, TimeBound{result.scaled_time}, backend);
  if (!result.report->controllable) {
    throw Error(ErrorKind::theorem_violation, "controllable for L at " + t.to_string() + " but not for Lambda at " +
                                                  result.scaled_time.to_string() + " (rank " +
                                                  std::to_string(result.report->rank) + ")");
  }
  return result;
}

template <class S>
ControllabilityReport reduced_generator_check(const DelaySystem<S>& system, const DelayVector& other,
                                              const RankBackend& backend) {
  const DelayVector& lambda = system.delays();
  if (!preorder_leq(lambda, other)) {
    throw Error(ErrorKind::not_comparable, "the delay vectors are not ordered: Z(Lambda) is not contained in Z(L)");
  }
  const TimeStamp bound = saturation_time(other, system.d());
  const LatticeEnumeration points = enumerate_lattice_points(other, TimeBound{bound}, false);
  std::set<ClassKey> seen;
  GeneratorSet<S> set;
  for (const auto& p : points.points) {
    ClassKey key = lambda.class_key(p);
    if (!seen.insert(key).second) continue;
    const Matrix<S> hat = xi_hat(system.xi_table(), lambda, key);
    set.generators.push_back({key, p, lambda.time_of(key), hat * system.matrices().b});
  }
  std::sort(set.generators.begin(), set.generators.end(), [&](const Generator<S>& a, const Generator<S>& b) {
    const auto c = lambda.compare(a.time, b.time);
    if (c != std::strong_ordering::equal) return c == std::strong_ordering::less;
    return a.key < b.key;
  });
  return report_from_generators(set, system.d(), false, backend);
}

#define RELDIFF_INSTANTIATE(S)                                                                                     \
  template ControllabilityReport is_relatively_controllable(const DelaySystem<S>&, const TimeBound&,               \
                                                            const RankBackend&);                                  \
  template ControllabilityReport ck_rank_condition(const DelaySystem<S>&, const TimeBound&, const RankBackend&);   \
  template MinimalTimeResult minimal_controllability_time(const DelaySystem<S>&, const RankBackend&);             \
  template ControllabilityReport controllable_some_time(const DelaySystem<S>&, const RankBackend&);               \
  template AugmentedSystem<S> augmented_system(const DelaySystem<S>&);                                            \
  template ControllabilityReport kalman_augmented_check(const DelaySystem<S>&, const TimeBound&,                  \
                                                        const RankBackend&);                                      \
  template TransferResult transfer_controllability(const DelaySystem<S>&, const DelayVector&, const RealTime&,     \
                                                   const RankBackend&);                                           \
  template ControllabilityReport reduced_generator_check(const DelaySystem<S>&, const DelayVector&,                \
                                                         const RankBackend&);

RELDIFF_INSTANTIATE(Complex)
RELDIFF_INSTANTIATE(ExactComplex)

#undef RELDIFF_INSTANTIATE

}  // namespace reldiff
