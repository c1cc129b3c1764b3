#include "reldiff/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <optional>
#include <sstream>

#include "reldiff/error.hpp"
#include "reldiff/io.hpp"

namespace reldiff::cli {

namespace {

using io::Json;

struct Options {
  std::string system_path;
  std::string time;
  std::string eps;
  std::string target;
  bool track = false;
  std::string plan_out;
  std::string until;
  std::size_t samples = 11;
  std::string plan_in;
  std::string csv_out;
  std::string other_path;
  double surrogate_eps = 0.0;
  bool json = false;
  std::string report_path;
  std::optional<double> rank_tol;
  bool numeric = false;
};

/// What a subcommand produced: the report body, a human summary and the exit code.
struct Outcome {
  Json result = Json::object();
  std::string text;
  int code = exit_true;
  Json extra_inputs = Json::object();
};

class Runner {
 public:
  Runner(const Options& opt, const io::SystemFile& file) : opt_(opt), file_(file) {}

  bool exact_scalars() const { return !opt_.numeric && file_.system.mode == ScalarMode::exact && file_.system.exact_matrices; }
  bool exact_field() const { return exact_scalars() && file_.delays.basis().all_exact(); }

  RankBackend backend() const {
    if (exact_scalars()) return RankBackend::exact();
    if (opt_.rank_tol) return RankBackend::numeric(opt_.rank_tol);
    return RankBackend::from_environment(ScalarMode::numeric);
  }

  /// Runs `fn` with the system in its exact or numeric scalar form.
  template <class Fn>
  Outcome with_scalars(Fn&& fn) const {
    if (exact_scalars()) return fn(DelaySystem<ExactComplex>(file_.system.exact(), file_.delays));
    return fn(DelaySystem<Complex>(file_.system.numeric(), file_.delays));
  }

  Outcome check(bool strict) const {
    const RealTime t = RealTime::parse(opt_.time);
    return with_scalars([&](const auto& system) {
      const ControllabilityReport r = strict ? ck_rank_condition(system, TimeBound{t}, backend())
                                             : is_relatively_controllable(system, TimeBound{t}, backend());
      Outcome o;
      o.result = {{"verdict", r.controllable}, {"time", t.to_string()}, {"report", io::report_to_json(r, file_.delays)}};
      std::ostringstream s;
      s << (strict ? "smooth-control rank condition" : "relatively controllable") << " at T = " << t.to_string()
        << ": " << (r.controllable ? "yes" : "no") << " (rank " << r.rank << " of " << r.dimension << ")\n";
      if (r.ambiguous_boundary()) {
        s << "warning: " << r.ambiguous.size() << " class time(s) lie within rounding distance of T\n";
      }
      o.text = s.str();
      o.code = r.controllable ? exit_true : exit_false;
      return o;
    });
  }

  Outcome mintime() const {
    return with_scalars([&](const auto& system) {
      const MinimalTimeResult r = minimal_controllability_time(system, backend());
      Outcome o;
      o.result = {{"controllable", r.controllable}, {"report", io::report_to_json(r.report, file_.delays)}};
      if (r.t_min) {
        o.result["t_min"] = io::stamp_to_json(*r.t_min, file_.delays);
        o.text = "T_min: " + io::describe_time(*r.t_min, file_.delays) + "\n";
      } else {
        o.result["t_min"] = nullptr;
        o.text = "not relatively controllable at any time (rank " + std::to_string(r.report.rank) + " of " +
                 std::to_string(r.report.dimension) + ")\n";
        o.code = exit_false;
      }
      return o;
    });
  }

  Outcome synthesize() const {
    if (exact_field()) return synthesize_in<ExactField>(DelaySystem<ExactComplex>(file_.system.exact(), file_.delays));
    return synthesize_in<NumericField>(DelaySystem<Complex>(file_.system.numeric(), file_.delays));
  }

  Outcome simulate() const {
    if (exact_field()) return simulate_in<ExactField>(DelaySystem<ExactComplex>(file_.system.exact(), file_.delays));
    return simulate_in<NumericField>(DelaySystem<Complex>(file_.system.numeric(), file_.delays));
  }

  Outcome compare(const DelayVector& other) const {
    const DelayVector& lambda = file_.delays;
    const bool leq = preorder_leq(lambda, other);
    const bool geq = preorder_leq(other, lambda);
    Outcome o;
    o.result = {{"lambda_leq_other", leq}, {"other_leq_lambda", geq}, {"equivalent", leq && geq}};
    std::ostringstream s;
    s << "Lambda <= L: " << (leq ? "yes" : "no") << ", L <= Lambda: " << (geq ? "yes" : "no") << "\n";
    if (leq) {
      const RealTime kappa = delay_ratio(lambda, other);
      o.result["kappa"] = kappa.to_string();
      s << "kappa = " << kappa.to_string() << "\n";
      if (!opt_.time.empty()) {
        const RealTime t = RealTime::parse(opt_.time);
        const Outcome transfer = with_scalars([&](const auto& system) {
          const TransferResult r = transfer_controllability(system, other, t, backend());
          Outcome inner;
          inner.result = {{"time", t.to_string()},
                          {"scaled_time", r.scaled_time.to_string()},
                          {"other_controllable", r.other_report.controllable},
                          {"lambda_controllable", r.report ? Json(r.report->controllable) : Json()}};
          inner.text = "L controllable at T = " + t.to_string() + ": " + (r.other_report.controllable ? "yes" : "no");
          if (r.report) inner.text += "; Lambda controllable at kappa T = " + r.scaled_time.to_string() + ": yes";
          inner.text += "\n";
          return inner;
        });
        o.result["transfer"] = transfer.result;
        s << transfer.text;
      }
    }
    o.text = s.str();
    o.code = leq ? exit_true : exit_false;
    return o;
  }

  Outcome reduce(const DelayVector& other) const {
    return with_scalars([&](const auto& system) {
      const ControllabilityReport r = reduced_generator_check(system, other, backend());
      Outcome o;
      o.result = {{"verdict", r.controllable}, {"report", io::report_to_json(r, file_.delays)}};
      o.text = std::string("reduced generator check: ") + (r.controllable ? "controllable" : "not controllable") +
               " (rank " + std::to_string(r.rank) + " of " + std::to_string(r.dimension) + ")\n";
      o.code = r.controllable ? exit_true : exit_false;
      return o;
    });
  }

  Outcome surrogate() const {
    const RealTime t = RealTime::parse(opt_.time);
    const SurrogateResult r = commensurable_surrogate(file_.delays, t, opt_.surrogate_eps);
    Outcome o;
    o.result = {{"n", r.n}, {"delays", io::delays_to_json(r.delays)}};
    std::ostringstream s;
    if (r.n == 0) {
      s << "delays are already commensurable\n";
    } else {
      s << "surrogate with denominator " << r.n << ":";
      for (std::size_t j = 0; j < r.delays.size(); ++j) {
        const auto e = r.delays.exact_delay(j);
        s << ' ' << (e ? to_string(*e) : format_real(r.delays.delay_value(j)));
      }
      s << "\n";
    }
    o.text = s.str();
    return o;
  }

 private:
  template <class F>
  SignalFunction<F> initial_condition(const SystemOf<F>& system) const {
    if (const auto* x0 = file_.signal("x0")) return x0->to_polynomial<F>();
    const DelayVector& delays = system.delays();
    const auto lmax = F::stamp_time(delays, delays.delay(delays.argmax_delay()));
    using Time = typename F::Time;
    return PiecewisePolynomial<F>::constant(Vec<F>(system.d(), typename F::Scalar(0)), Time(Time(0) - lmax), Time(0));
  }

  template <class F>
  Vec<F> parse_target(std::size_t d) const {
    Vec<F> out;
    std::stringstream in(opt_.target);
    std::string item;
    while (std::getline(in, item, ',')) {
      const RealTime v = RealTime::parse(item);
      if constexpr (F::exact) {
        out.push_back(ExactComplex(*v.exact));
      } else {
        out.push_back(Complex(v.value, 0.0));
      }
    }
    if (out.size() != d) {
      throw Error(ErrorKind::dimension_mismatch,
                  "target has " + std::to_string(out.size()) + " entries, expected " + std::to_string(d));
    }
    return out;
  }

  template <class F>
  Outcome synthesize_in(const SystemOf<F>& system) const {
    using Time = typename F::Time;
    const Time t = F::from_real(RealTime::parse(opt_.time));
    const SignalFunction<F> x0 = initial_condition<F>(system);
    ControlPlan<F> plan;
    double residual = 0.0;
    if (opt_.track) {
      const auto* x1spec = file_.signal("x1");
      if (x1spec == nullptr) throw Error(ErrorKind::schema_error, "--track needs an x1 signal in the system file");
      const SignalFunction<F> x1 = x1spec->to_polynomial<F>();
      Time eps = opt_.eps.empty()
                     ? Time(F::from_real(epsilon0(system.delays(), TimeBound{F::bound(t)})) / Time(2))
                     : F::from_real(RealTime::parse(opt_.eps));
      plan = synthesize_tracking_control(system, x0, x1, t, eps, backend());
      residual = plan_residual(system, x0, plan, x1);
    } else {
      const Vec<F> x1 = parse_target<F>(system.d());
      plan = synthesize_point_control(system, x0, x1, t, backend());
      residual = plan_residual(system, x0, plan, SignalFunction<F>(system.d(), [x1](const Time&) { return x1; }));
    }
    const Json plan_json = io::plan_to_json(plan, system.delays());
    if (!opt_.plan_out.empty()) {
      std::ofstream f(opt_.plan_out);
      if (!f) throw Error(ErrorKind::invalid_argument, "cannot write " + opt_.plan_out);
      f << plan_json.dump(2) << '\n';
    }
    Outcome o;
    o.result = {{"plan", plan_json}, {"residual", residual}, {"field", F::exact ? "exact" : "numeric"}};
    std::ostringstream s;
    s << (opt_.track ? "tracking" : "point") << " plan at T = " << F::time_string(t) << ": "
      << (opt_.track ? plan.segments.size() : plan.impulses.size()) << (opt_.track ? " segment(s)" : " impulse(s)");
    if (plan.eps) s << ", eps = " << F::time_string(*plan.eps);
    s << ", residual " << format_real(residual) << "\n";
    for (const auto& w : plan.warnings) s << "warning: " << w << "\n";
    o.text = s.str();
    return o;
  }

  template <class F>
  Outcome simulate_in(const SystemOf<F>& system) const {
    using Time = typename F::Time;
    const Time until = F::from_real(RealTime::parse(opt_.until));
    if (until < Time(0)) throw Error(ErrorKind::invalid_argument, "--until must be nonnegative");
    const SignalFunction<F> x0 = initial_condition<F>(system);
    Outcome o;
    SignalFunction<F> u = SignalFunction<F>::zero(system.m());
    if (!opt_.plan_in.empty()) {
      std::ifstream f(opt_.plan_in);
      if (!f) throw Error(ErrorKind::schema_error, "cannot open " + opt_.plan_in);
      Json j;
      try {
        j = Json::parse(f);
      } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::schema_error, opt_.plan_in + ": " + e.what());
      }
      o.extra_inputs["plan"] = j;
      u = plan_signal(io::plan_from_json<F>(j, system.delays()));
    } else if (const auto* us = file_.signal("u")) {
      u = us->to_polynomial<F>();
    }
    std::vector<Time> times;
    std::vector<Vec<F>> states;
    const std::size_t k = opt_.samples;
    for (std::size_t i = 0; i < k; ++i) {
      const Time t = k == 1 ? until : Time(until * Time(static_cast<long>(i)) / Time(static_cast<long>(k - 1)));
      times.push_back(t);
      states.push_back(solve_explicit(system, x0, u, t));
    }
    std::ostringstream csv;
    io::write_trajectory_csv<F>(csv, times, states);
    Json last = Json::array();
    for (const auto& v : states.back()) last.push_back(io::scalar_to_json(v));
    o.result = {{"until", F::time_string(until)}, {"samples", k}, {"final_state", last}};
    if (!opt_.csv_out.empty()) {
      std::ofstream f(opt_.csv_out);
      if (!f) throw Error(ErrorKind::invalid_argument, "cannot write " + opt_.csv_out);
      f << csv.str();
      o.result["csv"] = opt_.csv_out;
      o.text = "wrote " + std::to_string(k) + " samples to " + opt_.csv_out + "\n";
    } else {
      o.text = csv.str();
    }
    return o;
  }

  const Options& opt_;
  const io::SystemFile& file_;
};

Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::schema_error, "cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::schema_error, path + ": " + e.what());
  }
}

/// A full system file or a bare {basis, M} delay object.
DelayVector load_other_delays(const Json& j) {
  if (j.is_object() && j.contains("basis")) return io::delays_from_json(j);
  return io::parse_system(j).delays;
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options opt;
  CLI::App app{"Relative controllability of linear difference equations with several delays", "reldiff"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_flag("--json", opt.json, "Print the run report as JSON instead of a summary");
  app.add_option("--report", opt.report_path, "Also write the run report to this file");
  app.add_option("--rank-tol", opt.rank_tol, "Relative singular value threshold for numeric ranks");
  app.add_flag("--numeric", opt.numeric, "Use floating arithmetic even for an exact system");

  auto system_arg = [&](CLI::App* sub) {
    sub->add_option("system", opt.system_path, "System file (JSON)")->required()->check(CLI::ExistingFile);
  };
  auto* check = app.add_subcommand("check", "Span of class sums with delay combination <= T");
  system_arg(check);
  check->add_option("--time", opt.time, "Horizon T")->required();
  auto* ck = app.add_subcommand("ck-check", "Same with delay combination < T (smooth controls)");
  system_arg(ck);
  ck->add_option("--time", opt.time, "Horizon T")->required();
  auto* mintime = app.add_subcommand("mintime", "Minimal controllability time");
  system_arg(mintime);
  auto* synth = app.add_subcommand("synthesize", "Steering control to a point or along a terminal window");
  system_arg(synth);
  synth->add_option("--time", opt.time, "Horizon T")->required();
  auto* target = synth->add_option("--target", opt.target, "Comma-separated terminal state");
  auto* track = synth->add_flag("--track", opt.track, "Track the x1 signal of the system file on [0, eps]");
  target->excludes(track);
  synth->add_option("--eps", opt.eps, "Window length for --track (default epsilon0 / 2)");
  synth->add_option("--plan-out", opt.plan_out, "Write the plan JSON here");
  auto* sim = app.add_subcommand("simulate", "Sample the solution on [0, until]");
  system_arg(sim);
  sim->add_option("--until", opt.until, "Last sample time")->required();
  sim->add_option("--samples", opt.samples, "Number of uniform samples")->check(CLI::PositiveNumber);
  sim->add_option("--plan", opt.plan_in, "Control plan JSON used as input")->check(CLI::ExistingFile);
  sim->add_option("--out", opt.csv_out, "CSV output path (stdout when omitted)");
  auto* cmp = app.add_subcommand("compare", "Compare rational dependence with another delay vector");
  system_arg(cmp);
  cmp->add_option("--other", opt.other_path, "System or delay file with the other delays")
      ->required()
      ->check(CLI::ExistingFile);
  cmp->add_option("--time", opt.time, "Transfer controllability from the other delays at this time");
  auto* red = app.add_subcommand("reduce", "Reduced generator check over a coarser delay vector");
  system_arg(red);
  red->add_option("--other", opt.other_path, "System or delay file with the coarser delays")
      ->required()
      ->check(CLI::ExistingFile);
  auto* sur = app.add_subcommand("surrogate", "Commensurable surrogate delays");
  system_arg(sur);
  sur->add_option("--time", opt.time, "Horizon T")->required();
  sur->add_option("--eps", opt.surrogate_eps, "Relative delay tolerance")->required()->check(CLI::PositiveNumber);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
    if (synth->parsed() && opt.target.empty() && !opt.track) {
      throw CLI::ValidationError("synthesize", "one of --target or --track is required");
    }
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_true : exit_usage;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  const auto started = std::chrono::steady_clock::now();
  try {
    const io::SystemFile file = io::load_system(opt.system_path);
    const Runner runner(opt, file);
    Json inputs{{"system", io::serialize_system(file)}};
    Outcome o;
    if (command == "check" || command == "ck-check") {
      o = runner.check(command == "ck-check");
    } else if (command == "mintime") {
      o = runner.mintime();
    } else if (command == "synthesize") {
      try {
        o = runner.synthesize();
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::not_controllable_at_t) throw;
        o.result = {{"error", e.what()}};
        o.text = std::string(e.what()) + "\n";
        o.code = exit_false;
      }
    } else if (command == "simulate") {
      o = runner.simulate();
    } else if (command == "compare" || command == "reduce") {
      const Json other_json = read_json(opt.other_path);
      const DelayVector other = load_other_delays(other_json);
      inputs["other"] = io::delays_to_json(other);
      o = command == "compare" ? runner.compare(other) : runner.reduce(other);
    } else {
      o = runner.surrogate();
    }
    for (const auto& [key, value] : o.extra_inputs.items()) inputs[key] = value;

    Json arguments{{"time", opt.time},       {"eps", opt.eps},         {"target", opt.target},
                   {"track", opt.track},     {"until", opt.until},     {"samples", opt.samples},
                   {"other", !opt.other_path.empty()}, {"surrogate_eps", opt.surrogate_eps},
                   {"numeric", opt.numeric}, {"rank_tol", opt.rank_tol ? Json(*opt.rank_tol) : Json()},
                   {"exact", runner.exact_scalars()}};
    io::RunReport report;
    report.command = command;
    report.arguments = arguments;
    report.inputs_digest = io::inputs_digest(command, arguments, inputs);
    report.result = o.result;
    report.result["exit_code"] = o.code;
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
    report.timings = {{"total_ms", ms}};

    const Json report_json = io::report_to_json(report);
    if (!opt.report_path.empty()) {
      std::ofstream f(opt.report_path);
      if (!f) throw Error(ErrorKind::invalid_argument, "cannot write " + opt.report_path);
      f << report_json.dump(2) << '\n';
    }
    if (opt.json) {
      out << report_json.dump(2) << '\n';
    } else {
      out << o.text;
    }
    return o.code;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_error;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_error;
  }
}

}  // namespace reldiff::cli
