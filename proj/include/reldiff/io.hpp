#pragma once

// JSON system files, plan and report serialization, CSV trajectories.
//
// Scalars are written as "p/q" strings in exact mode (or [re, im] pairs when
// the imaginary part is nonzero) and as JSON numbers in numeric mode. Decimal
// literals always count as floating values.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "reldiff/coefficients.hpp"
#include "reldiff/controllability.hpp"
#include "reldiff/delay_structure.hpp"
#include "reldiff/synthesis.hpp"

namespace reldiff::io {

using Json = nlohmann::ordered_json;

/// A scalar as read from a file: always numeric, exact when written as a rational.
struct ScalarValue {
  Complex numeric;
  std::optional<ExactComplex> exact;
};

struct SegmentSpec {
  RealTime start;
  RealTime end;
  std::vector<std::vector<ScalarValue>> coeffs;  // [component][power], in t - start
};

struct SignalSpec {
  std::size_t dimension = 0;
  std::vector<SegmentSpec> segments;

  /// Throws MixedScalarMode when the exact field is requested for inexact data.
  template <class F>
  PiecewisePolynomial<F> to_polynomial() const;
};

struct SystemFile {
  SystemSpec system;
  DelayVector delays;
  std::map<std::string, SignalSpec> signals;  // "x0", "x1", "u"

  const SignalSpec* signal(const std::string& name) const;
};

ScalarValue parse_scalar(const Json& j, ScalarMode mode);
Json scalar_to_json(const ExactComplex& z);
Json scalar_to_json(const Complex& z);

SystemFile parse_system(const Json& j);
SystemFile load_system(const std::filesystem::path& path);
Json serialize_system(const SystemFile& file);

Json delays_to_json(const DelayVector& delays);
DelayVector delays_from_json(const Json& j);

SignalSpec parse_signal(const Json& j, ScalarMode mode);
Json serialize_signal(const SignalSpec& s);

Json stamp_to_json(const TimeStamp& t, const DelayVector& delays);
TimeStamp stamp_from_json(const Json& j, const DelayVector& delays);
Json report_to_json(const ControllabilityReport& r, const DelayVector& delays);

/// Time values of a field: "p/q" strings when exact, numbers otherwise.
template <class F>
Json time_to_json(const typename F::Time& t);
template <class F>
typename F::Time time_from_json(const Json& j);

/// Piecewise polynomial as a segment list.
template <class F>
Json polynomial_to_json(const PiecewisePolynomial<F>& p);
template <class F>
PiecewisePolynomial<F> polynomial_from_json(const Json& j, std::size_t dimension);

/// Plans with opaque (evaluator) segments cannot be written and raise InvalidArgument.
template <class F>
Json plan_to_json(const ControlPlan<F>& plan, const DelayVector& delays);
template <class F>
ControlPlan<F> plan_from_json(const Json& j, const DelayVector& delays);

/// Output of one CLI run. The digest covers command, arguments and inputs, never
/// the timings.
struct RunReport {
  std::string command;
  std::string inputs_digest;
  Json arguments = Json::object();
  Json result = Json::object();
  Json timings = Json::object();

  friend bool operator==(const RunReport&, const RunReport&) = default;
};

Json report_to_json(const RunReport& r);
RunReport report_from_json(const Json& j);

std::uint64_t fnv1a64(std::string_view bytes);
std::string digest_hex(std::uint64_t h);
/// Digest of a canonical dump of the given inputs.
std::string inputs_digest(const std::string& command, const Json& arguments, const Json& inputs);

/// "t,x1,...,xd" rows; imaginary columns are added only when some value is complex.
template <class F>
void write_trajectory_csv(std::ostream& out, const std::vector<typename F::Time>& times,
                          const std::vector<Vec<F>>& states);

/// "4 = 4/1 (exact)" or "2.8284271247461903 = 2*l2 (basis combination)".
std::string describe_time(const TimeStamp& t, const DelayVector& delays);

}  // namespace reldiff::io
