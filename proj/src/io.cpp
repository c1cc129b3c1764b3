#include "reldiff/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "reldiff/error.hpp"

namespace reldiff::io {

namespace {

[[noreturn]] void schema(const std::string& what) { throw Error(ErrorKind::schema_error, what); }

const Json& field(const Json& j, const char* name, const std::string& where) {
  if (!j.is_object() || !j.contains(name)) schema(where + ": missing field '" + name + "'");
  return j.at(name);
}

std::int64_t as_integer(const Json& j, const std::string& where) {
  if (!j.is_number_integer()) schema(where + " must be an integer");
  return j.get<std::int64_t>();
}

/// A real literal: integers and "p/q" are exact, decimals and JSON floats are not.
struct RealLiteral {
  double value = 0.0;
  std::optional<Rational> exact;
};

RealLiteral parse_real(const Json& j, const std::string& where) {
  if (j.is_number_integer()) {
    const Rational q(j.get<long>());
    return {to_double(q), q};
  }
  if (j.is_number_float()) return {j.get<double>(), std::nullopt};
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (auto q = parse_rational(s)) return {to_double(*q), *q};
    if (looks_floating(s) && parse_exact_decimal(s)) return {std::stod(s), std::nullopt};
    throw Error(ErrorKind::rational_parse_error, where + ": cannot parse '" + s + "'");
  }
  schema(where + " must be a number or a string");
}

RealTime parse_time(const Json& j, const std::string& where) {
  if (j.is_number_integer()) return RealTime::from_rational(Rational(j.get<long>()));
  if (j.is_number_float()) return RealTime::from_double(j.get<double>());
  if (j.is_string()) return RealTime::parse(j.get<std::string>());
  schema(where + " must be a time value");
}

Json time_json(const RealTime& t) {
  if (t.exact) return to_string(*t.exact);
  return t.value;
}

template <class S>
Matrix<S> parse_matrix(const Json& j, std::size_t rows, std::size_t cols, ScalarMode mode, const std::string& where,
                       bool want_exact) {
  if (!j.is_array()) schema(where + " must be an array of rows");
  if (j.size() != rows) {
    throw Error(ErrorKind::dimension_mismatch, where + " has " + std::to_string(j.size()) + " rows, expected " +
                                                   std::to_string(rows));
  }
  Matrix<S> m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    const Json& row = j[i];
    if (!row.is_array()) schema(where + " row " + std::to_string(i) + " must be an array");
    if (row.size() != cols) {
      throw Error(ErrorKind::dimension_mismatch, where + " row " + std::to_string(i) + " has " +
                                                     std::to_string(row.size()) + " entries, expected " +
                                                     std::to_string(cols));
    }
    for (std::size_t k = 0; k < cols; ++k) {
      const ScalarValue v = parse_scalar(row[k], mode);
      if constexpr (std::is_same_v<S, ExactComplex>) {
        if (want_exact && !v.exact) {
          throw Error(ErrorKind::rational_parse_error, where + ": entry (" + std::to_string(i) + ", " +
                                                           std::to_string(k) + ") is not a rational");
        }
        m(i, k) = v.exact ? *v.exact : ExactComplex();
      } else {
        m(i, k) = v.numeric;
      }
    }
  }
  return m;
}

template <class S>
Json matrix_json(const Matrix<S>& m) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (std::size_t k = 0; k < m.cols(); ++k) row.push_back(scalar_to_json(m(i, k)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json value_json(const ScalarValue& v) { return v.exact ? scalar_to_json(*v.exact) : scalar_to_json(v.numeric); }

std::string basis_literal(const BasisValue& b) { return b.exact ? to_string(*b.exact) : format_real(b.numeric); }

template <class F>
Json vec_json(const Vec<F>& v) {
  Json out = Json::array();
  for (const auto& x : v) out.push_back(scalar_to_json(x));
  return out;
}

template <class F>
typename F::Scalar scalar_from(const Json& j) {
  const ScalarValue v = parse_scalar(j, F::exact ? ScalarMode::exact : ScalarMode::numeric);
  if constexpr (F::exact) {
    return *v.exact;
  } else {
    return v.numeric;
  }
}

template <class F>
Vec<F> vec_from(const Json& j) {
  if (!j.is_array()) schema("vector must be an array");
  Vec<F> out;
  for (const auto& x : j) out.push_back(scalar_from<F>(x));
  return out;
}

}  // namespace

ScalarValue parse_scalar(const Json& j, ScalarMode mode) {
  if (j.is_array()) {
    if (j.size() != 2) schema("complex entries are written as [re, im]");
    const ScalarValue re = parse_scalar(j[0], mode);
    const ScalarValue im = parse_scalar(j[1], mode);
    if (re.numeric.imag() != 0.0 || im.numeric.imag() != 0.0) schema("nested complex entry");
    ScalarValue out{{re.numeric.real(), im.numeric.real()}, std::nullopt};
    if (re.exact && im.exact) out.exact = ExactComplex(re.exact->real(), im.exact->real());
    return out;
  }
  const RealLiteral r = parse_real(j, "scalar entry");
  if (mode == ScalarMode::exact && !r.exact) {
    throw Error(ErrorKind::rational_parse_error, "floating entry " + j.dump() + " in an exact-mode file");
  }
  ScalarValue out{{r.value, 0.0}, std::nullopt};
  if (r.exact) out.exact = ExactComplex(*r.exact);
  return out;
}

Json scalar_to_json(const ExactComplex& z) {
  if (sgn(z.imag()) == 0) return to_string(z.real());
  return Json::array({to_string(z.real()), to_string(z.imag())});
}

Json scalar_to_json(const Complex& z) {
  if (z.imag() == 0.0) return z.real();
  return Json::array({z.real(), z.imag()});
}

template <class F>
PiecewisePolynomial<F> SignalSpec::to_polynomial() const {
  std::vector<PolynomialPiece<F>> pieces;
  for (const auto& seg : segments) {
    PolynomialPiece<F> p;
    if constexpr (F::exact) {
      if (!seg.start.exact || !seg.end.exact) throw Error(ErrorKind::mixed_scalar_mode, "signal times are not exact");
    }
    p.start = F::from_real(seg.start);
    p.end = F::from_real(seg.end);
    for (const auto& comp : seg.coeffs) {
      std::vector<typename F::Scalar> poly;
      for (const auto& c : comp) {
        if constexpr (F::exact) {
          if (!c.exact) throw Error(ErrorKind::mixed_scalar_mode, "signal coefficient is not exact");
          poly.push_back(*c.exact);
        } else {
          poly.push_back(c.numeric);
        }
      }
      p.coeffs.push_back(std::move(poly));
    }
    pieces.push_back(std::move(p));
  }
  return PiecewisePolynomial<F>(dimension, std::move(pieces));
}

template PiecewisePolynomial<NumericField> SignalSpec::to_polynomial<NumericField>() const;
template PiecewisePolynomial<ExactField> SignalSpec::to_polynomial<ExactField>() const;

const SignalSpec* SystemFile::signal(const std::string& name) const {
  const auto it = signals.find(name);
  return it == signals.end() ? nullptr : &it->second;
}

SignalSpec parse_signal(const Json& j, ScalarMode mode) {
  const Json& segs = j.is_array() ? j : field(j, "segments", "signal");
  if (!segs.is_array() || segs.empty()) schema("signal needs a non-empty segment list");
  SignalSpec s;
  for (const auto& seg : segs) {
    SegmentSpec out{parse_time(field(seg, "start", "segment"), "segment start"),
                    parse_time(field(seg, "end", "segment"), "segment end"),
                    {}};
    const Json& coeffs = field(seg, "coeffs", "segment");
    if (!coeffs.is_array() || coeffs.empty()) schema("segment coeffs must list one polynomial per component");
    for (const auto& comp : coeffs) {
      if (!comp.is_array() || comp.empty()) schema("each component is a non-empty coefficient list");
      std::vector<ScalarValue> poly;
      for (const auto& c : comp) poly.push_back(parse_scalar(c, mode));
      out.coeffs.push_back(std::move(poly));
    }
    if (s.dimension == 0) s.dimension = out.coeffs.size();
    if (out.coeffs.size() != s.dimension) throw Error(ErrorKind::dimension_mismatch, "segments disagree on dimension");
    s.segments.push_back(std::move(out));
  }
  if (j.is_object() && j.contains("dimension") &&
      static_cast<std::size_t>(as_integer(j["dimension"], "signal dimension")) != s.dimension) {
    throw Error(ErrorKind::dimension_mismatch, "signal dimension field disagrees with its segments");
  }
  // Validates contiguity and ordering up front.
  (void)s.to_polynomial<NumericField>();
  return s;
}

Json serialize_signal(const SignalSpec& s) {
  Json segs = Json::array();
  for (const auto& seg : s.segments) {
    Json coeffs = Json::array();
    for (const auto& comp : seg.coeffs) {
      Json poly = Json::array();
      for (const auto& c : comp) poly.push_back(value_json(c));
      coeffs.push_back(std::move(poly));
    }
    segs.push_back(Json{{"start", time_json(seg.start)}, {"end", time_json(seg.end)}, {"coeffs", std::move(coeffs)}});
  }
  return Json{{"dimension", s.dimension}, {"segments", std::move(segs)}};
}

DelayVector delays_from_json(const Json& j) {
  const Json& basis_json = field(j, "basis", "delays");
  const Json& m_json = field(j, "M", "delays");
  const bool independent = j.value("independent", true);
  if (!basis_json.is_array() || basis_json.empty()) schema("delays.basis must be a non-empty list");
  std::vector<BasisValue> basis;
  for (const auto& b : basis_json) {
    const RealLiteral r = parse_real(b, "basis value");
    basis.push_back(r.exact ? BasisValue::rational(*r.exact) : BasisValue::real(r.value));
  }
  if (!independent && basis.size() > 1) {
    schema("a basis with more than one element must be declared rationally independent");
  }
  if (!m_json.is_array() || m_json.empty()) schema("delays.M must be a non-empty list of rows");
  Matrix<Rational> m(m_json.size(), basis.size());
  for (std::size_t i = 0; i < m_json.size(); ++i) {
    const Json& row = m_json[i];
    if (!row.is_array() || row.size() != basis.size()) {
      throw Error(ErrorKind::dimension_mismatch, "delays.M row " + std::to_string(i) + " needs " +
                                                     std::to_string(basis.size()) + " entries");
    }
    for (std::size_t k = 0; k < basis.size(); ++k) {
      const RealLiteral r = parse_real(row[k], "delays.M entry");
      if (!r.exact) throw Error(ErrorKind::rational_parse_error, "delays.M entries must be integers or p/q");
      m(i, k) = *r.exact;
    }
  }
  return normalize_delays(basis, m, independent);
}

Json delays_to_json(const DelayVector& delays) {
  Json basis = Json::array();
  for (const auto& b : delays.basis().values()) basis.push_back(basis_literal(b));
  Json m = Json::array();
  for (std::size_t j = 0; j < delays.size(); ++j) {
    Json row = Json::array();
    for (std::size_t k = 0; k < delays.basis_size(); ++k) row.push_back(delays.matrix()(j, k));
    m.push_back(std::move(row));
  }
  return Json{{"basis", std::move(basis)}, {"M", std::move(m)}, {"independent", delays.basis().independence_declared()}};
}

SystemFile parse_system(const Json& j) {
  if (!j.is_object()) schema("system file must be a JSON object");
  const auto d = static_cast<std::size_t>(as_integer(field(j, "d", "system"), "d"));
  const auto m = static_cast<std::size_t>(as_integer(field(j, "m", "system"), "m"));
  const auto n = static_cast<std::size_t>(as_integer(field(j, "N", "system"), "N"));
  if (d == 0 || m == 0 || n == 0) schema("d, m and N must be positive");
  const std::string mode_name = j.value("scalar_mode", std::string("numeric"));
  if (mode_name != "exact" && mode_name != "numeric") schema("scalar_mode must be \"exact\" or \"numeric\"");
  const ScalarMode mode = mode_name == "exact" ? ScalarMode::exact : ScalarMode::numeric;

  const Json& a_json = field(j, "A", "system");
  if (!a_json.is_array()) schema("A must be a list of matrices");
  if (a_json.size() != n) {
    throw Error(ErrorKind::dimension_mismatch, "A lists " + std::to_string(a_json.size()) + " matrices, N = " +
                                                   std::to_string(n));
  }
  const Json& b_json = field(j, "B", "system");

  // Exact form whenever every entry is rational; numeric form always.
  bool all_exact = true;
  SystemMatrices<Complex> numeric;
  SystemMatrices<ExactComplex> exact;
  for (std::size_t k = 0; k < n; ++k) {
    const std::string where = "A[" + std::to_string(k) + "]";
    numeric.a.push_back(parse_matrix<Complex>(a_json[k], d, d, mode, where, false));
  }
  numeric.b = parse_matrix<Complex>(b_json, d, m, mode, "B", false);
  try {
    for (std::size_t k = 0; k < n; ++k) {
      exact.a.push_back(parse_matrix<ExactComplex>(a_json[k], d, d, mode, "A[" + std::to_string(k) + "]", true));
    }
    exact.b = parse_matrix<ExactComplex>(b_json, d, m, mode, "B", true);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::rational_parse_error) throw;
    all_exact = false;
  }
  SystemSpec spec = all_exact ? SystemSpec::from_exact(std::move(exact)) : SystemSpec::from_numeric(std::move(numeric));
  spec.mode = mode;

  DelayVector delays = delays_from_json(field(j, "delays", "system"));
  if (delays.size() != n) {
    throw Error(ErrorKind::dimension_mismatch, "delays list " + std::to_string(delays.size()) + " entries, N = " +
                                                   std::to_string(n));
  }
  SystemFile file{std::move(spec), std::move(delays), {}};
  if (j.contains("signals")) {
    const Json& sig = j["signals"];
    if (!sig.is_object()) schema("signals must be an object");
    for (const auto& [name, value] : sig.items()) {
      if (name != "x0" && name != "x1" && name != "u") schema("unknown signal '" + name + "'");
      SignalSpec s = parse_signal(value, mode);
      const std::size_t want = name == "u" ? m : d;
      if (s.dimension != want) {
        throw Error(ErrorKind::dimension_mismatch, "signal " + name + " has dimension " +
                                                       std::to_string(s.dimension) + ", expected " +
                                                       std::to_string(want));
      }
      file.signals.emplace(name, std::move(s));
    }
  }
  return file;
}

SystemFile load_system(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) schema("cannot open " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    schema(path.string() + ": " + e.what());
  }
  return parse_system(j);
}

Json serialize_system(const SystemFile& file) {
  const SystemSpec& spec = file.system;
  Json out;
  out["d"] = spec.d();
  out["m"] = spec.m();
  out["N"] = spec.n_delays();
  out["scalar_mode"] = std::string(to_string(spec.mode));
  Json a = Json::array();
  const bool write_exact = spec.mode == ScalarMode::exact && spec.exact_matrices.has_value();
  for (std::size_t k = 0; k < spec.n_delays(); ++k) {
    a.push_back(write_exact ? matrix_json(spec.exact().a[k]) : matrix_json(spec.numeric().a[k]));
  }
  out["A"] = std::move(a);
  out["B"] = write_exact ? matrix_json(spec.exact().b) : matrix_json(spec.numeric().b);
  out["delays"] = delays_to_json(file.delays);
  if (!file.signals.empty()) {
    Json sig = Json::object();
    for (const auto& [name, s] : file.signals) sig[name] = serialize_signal(s);
    out["signals"] = std::move(sig);
  }
  return out;
}

Json stamp_to_json(const TimeStamp& t, const DelayVector& delays) {
  Json out{{"coeffs", t.coeffs}, {"value", t.numeric}};
  if (const auto e = delays.exact_time(t)) out["exact"] = to_string(*e);
  return out;
}

TimeStamp stamp_from_json(const Json& j, const DelayVector& delays) {
  const Json& c = field(j, "coeffs", "time stamp");
  if (!c.is_array() || c.size() != delays.basis_size()) schema("time stamp coefficients do not match the basis");
  IntVector coeffs;
  for (const auto& v : c) coeffs.push_back(as_integer(v, "time stamp coefficient"));
  return delays.stamp(std::move(coeffs));
}

Json report_to_json(const ControllabilityReport& r, const DelayVector& delays) {
  Json classes = Json::array();
  for (std::size_t i = 0; i < r.class_keys.size(); ++i) {
    classes.push_back(Json{{"key", r.class_keys[i].c}, {"time", stamp_to_json(r.class_times[i], delays)}});
  }
  Json cert = Json::array();
  for (const auto& [cls, col] : r.certificate) cert.push_back(Json{{"class", cls}, {"column", col}});
  Json ambiguous = Json::array();
  for (const auto& t : r.ambiguous) ambiguous.push_back(stamp_to_json(t, delays));
  return Json{{"controllable", r.controllable}, {"rank", r.rank},         {"dimension", r.dimension},
              {"strict", r.strict},             {"classes", classes},     {"certificate", cert},
              {"ambiguous_boundary", ambiguous}};
}

template <class F>
Json time_to_json(const typename F::Time& t) {
  if constexpr (F::exact) {
    return to_string(t);
  } else {
    return t;
  }
}

template <class F>
typename F::Time time_from_json(const Json& j) {
  const RealTime r = parse_time(j, "time");
  if constexpr (F::exact) {
    return F::from_real(r);
  } else {
    return r.value;
  }
}

template <class F>
Json polynomial_to_json(const PiecewisePolynomial<F>& p) {
  Json segs = Json::array();
  for (const auto& piece : p.pieces()) {
    Json coeffs = Json::array();
    for (const auto& comp : piece.coeffs) coeffs.push_back(vec_json<F>(comp));
    segs.push_back(Json{{"start", time_to_json<F>(piece.start)}, {"end", time_to_json<F>(piece.end)},
                        {"coeffs", std::move(coeffs)}});
  }
  return segs;
}

template <class F>
PiecewisePolynomial<F> polynomial_from_json(const Json& j, std::size_t dimension) {
  if (!j.is_array() || j.empty()) schema("polynomial needs a non-empty segment list");
  std::vector<PolynomialPiece<F>> pieces;
  for (const auto& seg : j) {
    PolynomialPiece<F> p{time_from_json<F>(field(seg, "start", "segment")), time_from_json<F>(field(seg, "end", "segment")),
                         {}};
    for (const auto& comp : field(seg, "coeffs", "segment")) p.coeffs.push_back(vec_from<F>(comp));
    pieces.push_back(std::move(p));
  }
  return PiecewisePolynomial<F>(dimension, std::move(pieces));
}

template <class F>
Json plan_to_json(const ControlPlan<F>& plan, const DelayVector& delays) {
  Json out;
  out["kind"] = plan.kind == PlanKind::point ? "point" : "tracking";
  out["field"] = F::exact ? "exact" : "numeric";
  out["inputs"] = plan.inputs;
  out["horizon"] = time_to_json<F>(plan.horizon);
  out["eps"] = plan.eps ? time_to_json<F>(*plan.eps) : Json();
  Json impulses = Json::array();
  for (const auto& imp : plan.impulses) {
    impulses.push_back(Json{{"key", imp.key.c},
                            {"class_time", stamp_to_json(imp.class_time, delays)},
                            {"at", time_to_json<F>(imp.at)},
                            {"value", vec_json<F>(imp.value)}});
  }
  out["impulses"] = std::move(impulses);
  Json segments = Json::array();
  for (const auto& seg : plan.segments) {
    const auto* poly = seg.value.polynomial();
    if (poly == nullptr) {
      throw Error(ErrorKind::invalid_argument, "plan segments given by evaluators cannot be serialized");
    }
    segments.push_back(Json{{"key", seg.key.c},
                            {"class_time", stamp_to_json(seg.class_time, delays)},
                            {"start", time_to_json<F>(seg.start)},
                            {"end", time_to_json<F>(seg.end)},
                            {"value", polynomial_to_json<F>(*poly)}});
  }
  out["segments"] = std::move(segments);
  out["warnings"] = plan.warnings;
  return out;
}

template <class F>
ControlPlan<F> plan_from_json(const Json& j, const DelayVector& delays) {
  ControlPlan<F> plan;
  const std::string kind = field(j, "kind", "plan").get<std::string>();
  if (kind != "point" && kind != "tracking") schema("plan kind must be point or tracking");
  plan.kind = kind == "point" ? PlanKind::point : PlanKind::tracking;
  plan.inputs = static_cast<std::size_t>(as_integer(field(j, "inputs", "plan"), "plan inputs"));
  plan.horizon = time_from_json<F>(field(j, "horizon", "plan"));
  if (j.contains("eps") && !j["eps"].is_null()) plan.eps = time_from_json<F>(j["eps"]);
  for (const auto& imp : j.value("impulses", Json::array())) {
    plan.impulses.push_back({ClassKey{imp.at("key").get<IntVector>()}, stamp_from_json(imp.at("class_time"), delays),
                             time_from_json<F>(imp.at("at")), vec_from<F>(imp.at("value"))});
  }
  for (const auto& seg : j.value("segments", Json::array())) {
    plan.segments.push_back({ClassKey{seg.at("key").get<IntVector>()}, stamp_from_json(seg.at("class_time"), delays),
                             time_from_json<F>(seg.at("start")), time_from_json<F>(seg.at("end")),
                             SignalFunction<F>(polynomial_from_json<F>(seg.at("value"), plan.inputs))});
  }
  if (plan.kind == PlanKind::tracking && !plan.eps) schema("tracking plan needs eps");
  plan.warnings = j.value("warnings", std::vector<std::string>{});
  return plan;
}

Json report_to_json(const RunReport& r) {
  return Json{{"command", r.command},
              {"inputs_digest", r.inputs_digest},
              {"arguments", r.arguments},
              {"result", r.result},
              {"timings", r.timings}};
}

RunReport report_from_json(const Json& j) {
  RunReport r;
  r.command = field(j, "command", "report").get<std::string>();
  r.inputs_digest = field(j, "inputs_digest", "report").get<std::string>();
  r.arguments = j.value("arguments", Json::object());
  r.result = j.value("result", Json::object());
  r.timings = j.value("timings", Json::object());
  return r;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string digest_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string inputs_digest(const std::string& command, const Json& arguments, const Json& inputs) {
  const Json canonical{{"command", command}, {"arguments", arguments}, {"inputs", inputs}};
  return digest_hex(fnv1a64(canonical.dump()));
}

template <class F>
void write_trajectory_csv(std::ostream& out, const std::vector<typename F::Time>& times,
                          const std::vector<Vec<F>>& states) {
  const std::size_t d = states.empty() ? 0 : states.front().size();
  bool complex_values = false;
  for (const auto& s : states) {
    for (const auto& v : s) complex_values = complex_values || ScalarTraits<typename F::Scalar>::to_complex(v).imag() != 0.0;
  }
  out << "t";
  for (std::size_t i = 1; i <= d; ++i) {
    if (complex_values) {
      out << ",x" << i << "_re,x" << i << "_im";
    } else {
      out << ",x" << i;
    }
  }
  out << '\n';
  char buf[32];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (std::size_t r = 0; r < times.size(); ++r) {
    out << num(F::to_double(times[r]));
    for (const auto& v : states[r]) {
      const Complex z = ScalarTraits<typename F::Scalar>::to_complex(v);
      out << ',' << num(z.real());
      if (complex_values) out << ',' << num(z.imag());
    }
    out << '\n';
  }
}

std::string describe_time(const TimeStamp& t, const DelayVector& delays) {
  if (const auto e = delays.exact_time(t)) {
    const std::string value = e->get_den() == 1 ? e->get_num().get_str() : format_real(to_double(*e));
    return value + " = " + to_string(*e) + " (exact)";
  }
  std::string terms;
  for (std::size_t k = 0; k < t.coeffs.size(); ++k) {
    if (t.coeffs[k] == 0) continue;
    if (!terms.empty()) terms += " + ";
    terms += std::to_string(t.coeffs[k]) + "*" + basis_literal(delays.basis()[k]);
  }
  if (terms.empty()) terms = "0";
  return format_real(t.numeric) + " = " + terms + " (basis combination)";
}

#define RELDIFF_INSTANTIATE(F)                                                                                  \
  template Json time_to_json<F>(const F::Time&);                                                                \
  template F::Time time_from_json<F>(const Json&);                                                              \
  template Json polynomial_to_json<F>(const PiecewisePolynomial<F>&);                                           \
  template PiecewisePolynomial<F> polynomial_from_json<F>(const Json&, std::size_t);                            \
  template Json plan_to_json<F>(const ControlPlan<F>&, const DelayVector&);                                     \
  template ControlPlan<F> plan_from_json<F>(const Json&, const DelayVector&);                                   \
  template void write_trajectory_csv<F>(std::ostream&, const std::vector<F::Time>&, const std::vector<Vec<F>>&);

RELDIFF_INSTANTIATE(NumericField)
RELDIFF_INSTANTIATE(ExactField)

#undef RELDIFF_INSTANTIATE

}  // namespace reldiff::io
