#include "reldiff/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <numeric>
#include <set>

#include "reldiff/error.hpp"
#include "reldiff/linalg.hpp"

namespace reldiff {

namespace {

template <class S>
std::vector<S> subtract(std::vector<S> a, const std::vector<S>& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
  return a;
}

template <class S>
void accumulate(std::vector<S>& acc, const std::vector<S>& v) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += v[i];
}

IntVector shifted_key(const IntVector& c, const DelayVector& delays, std::size_t j) {
  IntVector out = c;
  for (std::size_t k = 0; k < out.size(); ++k) out[k] += delays.matrix()(j, k);
  return out;
}

template <class F>
void require_nonnegative(const typename F::Time& t) {
  if (t < typename F::Time(0)) throw Error(ErrorKind::invalid_argument, "time must be nonnegative");
}

/// Terms of the free response: Xi_p A_j applied to x0 at t - Lambda.(p + e_j), for
/// every p with Lambda.p <= t whose successor p + e_j lies beyond t.
template <class F, class Visit>
void for_each_free_term(const SystemOf<F>& system, const typename F::Time& t, Visit&& visit) {
  const DelayVector& delays = system.delays();
  const TimeBound bound{F::bound(t)};
  const LatticeEnumeration points = enumerate_lattice_points(delays, bound, false);
  for (std::size_t i = 0; i < points.points.size(); ++i) {
    std::optional<Matrix<typename F::Scalar>> xi;
    for (std::size_t j = 0; j < delays.size(); ++j) {
      const TimeStamp next = delays.stamp(shifted_key(points.keys[i].c, delays, j));
      if (delays.place(next, bound).at_or_below()) continue;
      if (!xi) xi = system.xi_table().xi(points.points[i].n);
      visit(*xi * system.matrices().a[j], next);
    }
  }
}

}  // namespace

template <class F>
double vector_norm(const Vec<F>& v) {
  double s = 0.0;
  for (const auto& x : v) {
    const double m = ScalarTraits<typename F::Scalar>::magnitude(x);
    s += m * m;
  }
  return std::sqrt(s);
}

template <class F>
Vec<F> free_response(const SystemOf<F>& system, const SignalFunction<F>& x0, const typename F::Time& t) {
  require_nonnegative<F>(t);
  if (x0.dimension() != system.d()) throw Error(ErrorKind::dimension_mismatch, "x0 dimension differs from d");
  Vec<F> out(system.d(), typename F::Scalar(0));
  for_each_free_term<F>(system, t, [&](const Matrix<typename F::Scalar>& coeff, const TimeStamp& next) {
    accumulate(out, coeff * x0(typename F::Time(t - F::stamp_time(system.delays(), next))));
  });
  return out;
}

template <class F>
Vec<F> solve_explicit(const SystemOf<F>& system, const SignalFunction<F>& x0, const SignalFunction<F>& u,
                      const typename F::Time& t) {
  if (u.dimension() != system.m()) throw Error(ErrorKind::dimension_mismatch, "u dimension differs from m");
  Vec<F> x = free_response(system, x0, t);
  const XiHatTable<typename F::Scalar> table(system.xi_table(), system.delays(), TimeBound{F::bound(t)}, false);
  for (const auto& e : table.entries()) {
    const Vec<F> input = u(typename F::Time(t - F::stamp_time(system.delays(), e.time)));
    accumulate(x, e.value * (system.matrices().b * input));
  }
  return x;
}

template <class F>
Vec<F> solve_recursive(const SystemOf<F>& system, const SignalFunction<F>& x0, const SignalFunction<F>& u,
                       const typename F::Time& t, std::size_t max_states) {
  const DelayVector& delays = system.delays();
  const TimeBound bound{F::bound(t)};
  // Instants are t - time(c) for keys c reachable from 0 by adding delays.
  std::set<IntVector> inside;
  std::set<IntVector> outside;
  std::vector<IntVector> stack{IntVector(delays.basis_size(), 0)};
  while (!stack.empty()) {
    IntVector c = std::move(stack.back());
    stack.pop_back();
    if (inside.count(c) || outside.count(c)) continue;
    if (inside.size() + outside.size() >= max_states) {
      throw Error(ErrorKind::recursion_budget_exceeded,
                  "more than " + std::to_string(max_states) + " instants needed to unfold the equation");
    }
    if (!delays.place(delays.stamp(c), bound).at_or_below()) {
      outside.insert(std::move(c));
      continue;
    }
    for (std::size_t j = 0; j < delays.size(); ++j) stack.push_back(shifted_key(c, delays, j));
    inside.insert(std::move(c));
  }

  auto instant = [&](const IntVector& c) { return typename F::Time(t - F::stamp_time(delays, delays.stamp(c))); };
  std::map<IntVector, Vec<F>> value;
  for (const auto& c : outside) value.emplace(c, x0(instant(c)));
  // Successors have a strictly larger coefficient sum, so descending sums are a valid order.
  std::vector<IntVector> order(inside.begin(), inside.end());
  auto weight = [](const IntVector& c) { return std::accumulate(c.begin(), c.end(), std::int64_t{0}); };
  std::stable_sort(order.begin(), order.end(), [&](const IntVector& a, const IntVector& b) { return weight(a) > weight(b); });
  const auto& mats = system.matrices();
  for (const auto& c : order) {
    Vec<F> x = mats.b * u(instant(c));
    for (std::size_t j = 0; j < delays.size(); ++j) accumulate(x, mats.a[j] * value.at(shifted_key(c, delays, j)));
    value.emplace(c, std::move(x));
  }
  return value.at(IntVector(delays.basis_size(), 0));
}

namespace {

template <class F>
struct Steering {
  GeneratorSet<typename F::Scalar> generators;
  Matrix<typename F::Scalar> stacked;  // [G_1 | G_2 | ...]
  Matrix<typename F::Scalar> right_inverse;
};

template <class F>
Steering<F> steering_data(const SystemOf<F>& system, const typename F::Time& t, const RankBackend& backend) {
  Steering<F> s;
  s.generators = controllability_generators(system, TimeBound{F::bound(t)}, false);
  const ControllabilityReport report = report_from_generators(s.generators, system.d(), false, backend);
  if (!report.controllable) {
    throw Error(ErrorKind::not_controllable_at_t, "rank " + std::to_string(report.rank) + " < " +
                                                      std::to_string(system.d()) + " at T = " + F::time_string(t));
  }
  std::vector<Matrix<typename F::Scalar>> blocks;
  for (const auto& g : s.generators.generators) blocks.push_back(g.block);
  s.stacked = hstack(blocks, system.d());
  if constexpr (F::exact) {
    s.right_inverse = exact_right_inverse(s.stacked);
  } else {
    s.right_inverse = numeric_right_inverse(s.stacked, backend.tolerance);
  }
  return s;
}

}  // namespace

template <class F>
ControlPlan<F> synthesize_point_control(const SystemOf<F>& system, const SignalFunction<F>& x0, const Vec<F>& x1,
                                        const typename F::Time& t, const RankBackend& backend) {
  require_nonnegative<F>(t);
  if (x1.size() != system.d()) throw Error(ErrorKind::dimension_mismatch, "target dimension differs from d");
  const Steering<F> s = steering_data<F>(system, t, backend);
  const Vec<F> rhs = subtract(x1, free_response(system, x0, t));
  Vec<F> u = s.right_inverse * rhs;
  if constexpr (!F::exact) {
    // One step of iterative refinement against the rounding of the right inverse.
    accumulate(u, s.right_inverse * subtract(rhs, s.stacked * u));
  }
  ControlPlan<F> plan;
  plan.kind = PlanKind::point;
  plan.inputs = system.m();
  plan.horizon = t;
  const std::size_t m = system.m();
  for (std::size_t i = 0; i < s.generators.generators.size(); ++i) {
    const auto& g = s.generators.generators[i];
    Vec<F> value(u.begin() + static_cast<std::ptrdiff_t>(i * m), u.begin() + static_cast<std::ptrdiff_t>((i + 1) * m));
    plan.impulses.push_back({g.key, g.time, typename F::Time(t - F::stamp_time(system.delays(), g.time)), std::move(value)});
  }
  return plan;
}

template <class F>
ControlPlan<F> synthesize_tracking_control(const SystemOf<F>& system, const SignalFunction<F>& x0,
                                           const SignalFunction<F>& x1, const typename F::Time& t,
                                           typename F::Time eps, const RankBackend& backend) {
  using Time = typename F::Time;
  using Scalar = typename F::Scalar;
  require_nonnegative<F>(t);
  if (x1.dimension() != system.d()) throw Error(ErrorKind::dimension_mismatch, "target dimension differs from d");
  if (!(Time(0) < eps)) throw Error(ErrorKind::invalid_argument, "eps must be positive");

  ControlPlan<F> plan;
  plan.kind = PlanKind::tracking;
  plan.inputs = system.m();
  plan.horizon = t;
  const Time e0 = F::from_real(epsilon0(system.delays(), TimeBound{F::bound(t)}));
  if (!(eps < e0)) {
    eps = Time(e0 / Time(2));
    plan.warnings.push_back("eps reduced to epsilon0 / 2 = " + F::time_string(eps));
    if (!(eps < e0)) throw Error(ErrorKind::epsilon_too_large, "eps is not below epsilon0 = " + F::time_string(e0));
  }
  plan.eps = eps;

  const Steering<F> s = steering_data<F>(system, t, backend);
  const std::size_t m = system.m();
  const std::size_t d = system.d();
  std::vector<SignalFunction<F>> blocks;

  const auto* x0p = x0.polynomial();
  const auto* x1p = x1.polynomial();
  if (x0p != nullptr && x1p != nullptr) {
    // U(s) = R (x1(s) - free_response(T + s)) as explicit polynomials on [0, eps].
    PiecewisePolynomial<F> free = PiecewisePolynomial<F>::constant(Vec<F>(d, Scalar(0)), Time(0), eps);
    for_each_free_term<F>(system, t, [&](const Matrix<Scalar>& coeff, const TimeStamp& next) {
      const Time offset = t - F::stamp_time(system.delays(), next);
      free = free.plus(x0p->shifted(offset, Time(0), eps).transformed(coeff));
    });
    const Matrix<Scalar> minus = Matrix<Scalar>::identity(d).map([](const Scalar& v) { return Scalar(0) - v; });
    const PiecewisePolynomial<F> diff = x1p->shifted(Time(0), Time(0), eps).plus(free.transformed(minus));
    PiecewisePolynomial<F> all = diff.transformed(s.right_inverse);
    if constexpr (!F::exact) {
      const PiecewisePolynomial<F> left = diff.plus(all.transformed(s.stacked).transformed(minus));
      all = all.plus(left.transformed(s.right_inverse));
    }
    for (std::size_t i = 0; i < s.generators.generators.size(); ++i) blocks.emplace_back(all.components(i * m, m));
  } else {
    auto shared_system = std::make_shared<SystemOf<F>>(system);
    auto r = std::make_shared<Matrix<Scalar>>(s.right_inverse);
    for (std::size_t i = 0; i < s.generators.generators.size(); ++i) {
      blocks.emplace_back(m, [shared_system, r, x0, x1, t, i, m](const Time& local) {
        const Vec<F> full = *r * subtract(x1(local), free_response(*shared_system, x0, Time(t + local)));
        return Vec<F>(full.begin() + static_cast<std::ptrdiff_t>(i * m),
                      full.begin() + static_cast<std::ptrdiff_t>((i + 1) * m));
      });
    }
  }
  for (std::size_t i = 0; i < s.generators.generators.size(); ++i) {
    const auto& g = s.generators.generators[i];
    const Time start = t - F::stamp_time(system.delays(), g.time);
    plan.segments.push_back({g.key, g.time, start, Time(start + eps), std::move(blocks[i])});
  }
  return plan;
}

template <class F>
Vec<F> evaluate_plan(const ControlPlan<F>& plan, const typename F::Time& t) {
  using Time = typename F::Time;
  Vec<F> out(plan.inputs, typename F::Scalar(0));
  const double scale = F::to_double(plan.horizon);
  if (plan.kind == PlanKind::point) {
    const Impulse<F>* best = nullptr;
    double best_gap = 0.0;
    for (const auto& imp : plan.impulses) {
      const double gap = std::abs(F::to_double(Time(imp.at - t)));
      if (F::exact ? imp.at == t : gap <= time_tolerance(scale)) {
        if (best == nullptr || gap < best_gap) {
          best = &imp;
          best_gap = gap;
        }
      }
    }
    if (best != nullptr) out = best->value;
    return out;
  }
  const double tol = F::tolerance(scale);
  for (const auto& seg : plan.segments) {
    const double below = F::to_double(Time(seg.start - t));
    const double above = F::to_double(Time(t - seg.end));
    const bool inside = F::exact ? !(t < seg.start) && !(seg.end < t) : below <= tol && above <= tol;
    if (!inside) continue;
    Time local = t - seg.start;
    if (local < Time(0)) local = Time(0);
    if (*plan.eps < local) local = *plan.eps;
    return seg.value(local);
  }
  return out;
}

template <class F>
SignalFunction<F> plan_signal(const ControlPlan<F>& plan) {
  auto shared = std::make_shared<ControlPlan<F>>(plan);
  return SignalFunction<F>(plan.inputs, [shared](const typename F::Time& t) { return evaluate_plan(*shared, t); });
}

template <class F>
bool segments_disjoint(const ControlPlan<F>& plan) {
  std::vector<std::pair<typename F::Time, typename F::Time>> spans;
  for (const auto& s : plan.segments) spans.emplace_back(s.start, s.end);
  std::sort(spans.begin(), spans.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 1; i < spans.size(); ++i) {
    if (!(spans[i - 1].second < spans[i].first)) return false;
  }
  return true;
}

template <class F>
double plan_residual(const SystemOf<F>& system, const SignalFunction<F>& x0, const ControlPlan<F>& plan,
                     const SignalFunction<F>& x1, std::size_t samples) {
  using Time = typename F::Time;
  const SignalFunction<F> u = plan_signal(plan);
  std::vector<Time> offsets{Time(0)};
  if (plan.kind == PlanKind::tracking && samples > 1) {
    offsets.clear();
    for (std::size_t k = 0; k < samples; ++k) {
      offsets.push_back(Time(*plan.eps * Time(static_cast<long>(k)) / Time(static_cast<long>(samples - 1))));
    }
  }
  double worst = 0.0;
  for (const auto& s : offsets) {
    const Vec<F> target = x1(s);
    const Vec<F> x = solve_explicit(system, x0, u, Time(plan.horizon + s));
    worst = std::max(worst, vector_norm<F>(subtract(x, target)) / (1.0 + vector_norm<F>(target)));
  }
  return worst;
}

#define RELDIFF_INSTANTIATE(F)                                                                                     \
  template double vector_norm<F>(const Vec<F>&);                                                                   \
  template Vec<F> free_response<F>(const SystemOf<F>&, const SignalFunction<F>&, const F::Time&);                  \
  template Vec<F> solve_explicit<F>(const SystemOf<F>&, const SignalFunction<F>&, const SignalFunction<F>&,         \
                                    const F::Time&);                                                               \
  template Vec<F> solve_recursive<F>(const SystemOf<F>&, const SignalFunction<F>&, const SignalFunction<F>&,        \
                                     const F::Time&, std::size_t);                                                 \
  template ControlPlan<F> synthesize_point_control<F>(const SystemOf<F>&, const SignalFunction<F>&, const Vec<F>&, \
                                                      const F::Time&, const RankBackend&);                         \
  template ControlPlan<F> synthesize_tracking_control<F>(const SystemOf<F>&, const SignalFunction<F>&,             \
                                                         const SignalFunction<F>&, const F::Time&, F::Time,        \
                                                         const RankBackend&);                                      \
  template Vec<F> evaluate_plan<F>(const ControlPlan<F>&, const F::Time&);                                         \
  template SignalFunction<F> plan_signal<F>(const ControlPlan<F>&);                                                \
  template bool segments_disjoint<F>(const ControlPlan<F>&);                                                       \
  template double plan_residual<F>(const SystemOf<F>&, const SignalFunction<F>&, const ControlPlan<F>&,            \
                                   const SignalFunction<F>&, std::size_t);

RELDIFF_INSTANTIATE(NumericField)
RELDIFF_INSTANTIATE(ExactField)

#undef RELDIFF_INSTANTIATE

}  // namespace reldiff
