#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "reldiff/coefficients.hpp"
#include "reldiff/controllability.hpp"
#include "reldiff/signal.hpp"

namespace reldiff {

template <class F>
using SystemOf = DelaySystem<typename F::Scalar>;

/// Contribution of the initial condition x0 (given on [-Lambda_max, 0)) to x(t).
template <class F>
Vec<F> free_response(const SystemOf<F>& system, const SignalFunction<F>& x0, const typename F::Time& t);

/// x(t) from the representation formula: free response plus class sums acting on u.
template <class F>
Vec<F> solve_explicit(const SystemOf<F>& system, const SignalFunction<F>& x0, const SignalFunction<F>& u,
                      const typename F::Time& t);

/// x(t) by unfolding the equation itself, memoized on the distinct instants visited.
template <class F>
Vec<F> solve_recursive(const SystemOf<F>& system, const SignalFunction<F>& x0, const SignalFunction<F>& u,
                       const typename F::Time& t, std::size_t max_states = 1'000'000);

enum class PlanKind { point, tracking };

template <class F>
struct Impulse {
  ClassKey key;
  TimeStamp class_time;
  typename F::Time at;  // T - class time
  Vec<F> value;
};

template <class F>
struct PlanSegment {
  ClassKey key;
  TimeStamp class_time;
  typename F::Time start;  // T - class time
  typename F::Time end;    // start + eps
  SignalFunction<F> value;  // as a function of t - start, on [0, eps]
};

template <class F>
struct ControlPlan {
  PlanKind kind = PlanKind::point;
  std::size_t inputs = 0;
  typename F::Time horizon{};
  std::optional<typename F::Time> eps;
  std::vector<Impulse<F>> impulses;
  std::vector<PlanSegment<F>> segments;
  std::vector<std::string> warnings;
};

/// Impulses u(T - Lambda.n) = U_[n] with U = R (x1 - free_response(T)) for a right inverse R.
template <class F>
ControlPlan<F> synthesize_point_control(const SystemOf<F>& system, const SignalFunction<F>& x0, const Vec<F>& x1,
                                        const typename F::Time& t, const RankBackend& backend);

/// Segments on [T - Lambda.n, T - Lambda.n + eps] such that x(T + s) = x1(s) for s in [0, eps].
/// An eps at or above epsilon0 is halved down to epsilon0 / 2 with a warning.
template <class F>
ControlPlan<F> synthesize_tracking_control(const SystemOf<F>& system, const SignalFunction<F>& x0,
                                           const SignalFunction<F>& x1, const typename F::Time& t,
                                           typename F::Time eps, const RankBackend& backend);

template <class F>
Vec<F> evaluate_plan(const ControlPlan<F>& plan, const typename F::Time& t);

template <class F>
SignalFunction<F> plan_signal(const ControlPlan<F>& plan);

template <class F>
bool segments_disjoint(const ControlPlan<F>& plan);

/// Largest |x(T + s) - x1(s)| over `samples` uniform points of the plan window
/// (only s = 0 for point plans), computed with solve_explicit.
template <class F>
double plan_residual(const SystemOf<F>& system, const SignalFunction<F>& x0, const ControlPlan<F>& plan,
                     const SignalFunction<F>& x1, std::size_t samples = 11);

template <class F>
double vector_norm(const Vec<F>& v);

}  // namespace reldiff
