#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "reldiff/cli.hpp"
#include "reldiff/error.hpp"
#include "reldiff/io.hpp"
#include "support/fixtures.hpp"
#include "support/random_instances.hpp"

using namespace reldiff;
using reldiff::io::Json;
using reldiff::testing::Random;
using EF = ExactField;
using NF = NumericField;

namespace {

const std::filesystem::path fixtures{RELDIFF_FIXTURE_DIR};

std::filesystem::path fixture(const char* name) { return fixtures / name; }

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::cli_dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("reldiff_io_test_" + name);
}

Json read(const std::filesystem::path& p) {
  std::ifstream in(p);
  return Json::parse(in);
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::invalid_argument;
}

Json three_state_json() { return read(fixture("three_state_half.json")); }

}  // namespace

TEST(SystemFile, HalfVariantCollapsesToOneRationalGenerator) {
  const auto file = io::load_system(fixture("three_state_half.json"));
  EXPECT_EQ(file.delays.basis_size(), 1u);
  EXPECT_TRUE(file.delays.commensurable());
  EXPECT_EQ(*file.delays.exact_delay(0), make_rational(1));
  EXPECT_EQ(*file.delays.exact_delay(1), make_rational(1, 2));
  EXPECT_EQ(file.system.mode, ScalarMode::exact);
  EXPECT_EQ(file.system.exact().a[0], reldiff::testing::three_state_matrices().a[0]);
  EXPECT_EQ(file.system.exact().b, reldiff::testing::three_state_matrices().b);
}

TEST(SystemFile, IrrationalVariantKeepsTwoGenerators) {
  const auto file = io::load_system(fixture("three_state_sqrt2.json"));
  EXPECT_EQ(file.delays.basis_size(), 2u);
  EXPECT_FALSE(file.delays.basis().all_exact());
  EXPECT_DOUBLE_EQ(file.delays.delay_value(1), std::numbers::sqrt2);
}

TEST(SystemFile, RoundTripFixtures) {
  for (const char* name : {"three_state_half.json", "three_state_sqrt2.json", "euler_d3_k2.json",
                           "four_state_remark.json", "two_state_remark.json"}) {
    const auto file = io::load_system(fixture(name));
    const Json once = io::serialize_system(file);
    const auto again = io::parse_system(once);
    EXPECT_EQ(io::serialize_system(again).dump(), once.dump()) << name;
    EXPECT_EQ(again.system.numeric().a, file.system.numeric().a) << name;
    EXPECT_EQ(again.system.numeric().b, file.system.numeric().b) << name;
    EXPECT_EQ(again.delays.matrix(), file.delays.matrix()) << name;
    EXPECT_EQ(again.signals.size(), file.signals.size()) << name;
  }
}

TEST(SystemFile, RandomExactSystemsRoundTrip) {
  Random rng(77);
  for (int trial = 0; trial < 60; ++trial) {
    const auto d = static_cast<std::size_t>(rng.integer(1, 4));
    const auto m = static_cast<std::size_t>(rng.integer(1, 2));
    const auto n = static_cast<std::size_t>(rng.integer(1, 3));
    auto matrices = reldiff::testing::random_system(rng, d, m, n);
    // Sprinkle in non-integer and complex entries.
    matrices.a[0](0, 0) = ExactComplex(make_rational(rng.integer(-7, 7), rng.integer(1, 5)),
                                       make_rational(rng.integer(-3, 3), rng.integer(1, 4)));
    const DelayVector delays = rng.chance(0.5) ? reldiff::testing::random_commensurable_delays(rng, n)
                                               : reldiff::testing::random_mixed_delays(rng, n);
    const io::SystemFile file{SystemSpec::from_exact(matrices), delays, {}};
    const auto back = io::parse_system(io::serialize_system(file));
    EXPECT_EQ(back.system.mode, ScalarMode::exact);
    for (std::size_t j = 0; j < n; ++j) EXPECT_EQ(back.system.exact().a[j], matrices.a[j]) << "trial " << trial;
    EXPECT_EQ(back.system.exact().b, matrices.b);
    ASSERT_EQ(back.delays.size(), n);
    for (std::size_t j = 0; j < n; ++j) {
      EXPECT_EQ(back.delays.exact_delay(j), delays.exact_delay(j));
      EXPECT_DOUBLE_EQ(back.delays.delay_value(j), delays.delay_value(j));
    }
    EXPECT_TRUE(preorder_equivalent(back.delays, delays));
  }
}

TEST(SystemFile, SignalsRoundTrip) {
  const auto file = io::load_system(fixture("euler_d3_k2.json"));
  ASSERT_NE(file.signal("x0"), nullptr);
  ASSERT_NE(file.signal("x1"), nullptr);
  EXPECT_EQ(file.signal("u"), nullptr);
  const auto x0 = file.signal("x0")->to_polynomial<EF>();
  EXPECT_EQ(x0.domain_start(), make_rational(-2));
  // Second component of the first piece is t + 2 in local form: at t = -3/2 it is 1/2.
  EXPECT_EQ(x0.evaluate(make_rational(-3, 2))[1], ExactComplex(make_rational(1, 2)));
  const auto back = io::parse_signal(io::serialize_signal(*file.signal("x0")), ScalarMode::exact);
  EXPECT_EQ(back.to_polynomial<EF>(), x0);
}

TEST(SystemFile, ShapeErrorsAreDimensionMismatch) {
  Json j = three_state_json();
  j["B"] = Json::array({Json::array({"0"}), Json::array({"1"})});
  EXPECT_EQ(kind_of([&] { io::parse_system(j); }), ErrorKind::dimension_mismatch);

  j = three_state_json();
  j["A"][1][2] = Json::array({"0", "0"});
  EXPECT_EQ(kind_of([&] { io::parse_system(j); }), ErrorKind::dimension_mismatch);

  j = three_state_json();
  j["N"] = 3;
  EXPECT_EQ(kind_of([&] { io::parse_system(j); }), ErrorKind::dimension_mismatch);

  j = read(fixture("euler_d3_k2.json"));
  j["signals"]["u"] = j["signals"]["x1"];
  EXPECT_EQ(kind_of([&] { io::parse_system(j); }), ErrorKind::dimension_mismatch);
}

TEST(SystemFile, FloatingEntriesInExactMode) {
  Json j = three_state_json();
  j["A"][0][0][2] = "-1.0";
  EXPECT_EQ(kind_of([&] { io::parse_system(j); }), ErrorKind::rational_parse_error);
  j = three_state_json();
  j["B"][2][0] = 1.0;
  EXPECT_EQ(kind_of([&] { io::parse_system(j); }), ErrorKind::rational_parse_error);
  j = three_state_json();
  j["scalar_mode"] = "numeric";
  j["A"][0][0][2] = "-1.0";
  const auto file = io::parse_system(j);
  EXPECT_FALSE(file.system.exact_matrices.has_value());
  EXPECT_EQ(file.system.numeric().a[0](0, 2), Complex(-1.0, 0.0));
}

TEST(SystemFile, SchemaErrors) {
  Json j = three_state_json();
  j.erase("B");
  EXPECT_EQ(kind_of([&] { io::parse_system(j); }), ErrorKind::schema_error);
  j = three_state_json();
  j["delays"]["independent"] = false;
  EXPECT_EQ(kind_of([&] { io::parse_system(j); }), ErrorKind::schema_error);
  j = three_state_json();
  j["scalar_mode"] = "symbolic";
  EXPECT_EQ(kind_of([&] { io::parse_system(j); }), ErrorKind::schema_error);
  j = three_state_json();
  j["A"][0][0][0] = "one";
  EXPECT_EQ(kind_of([&] { io::parse_system(j); }), ErrorKind::rational_parse_error);
  j = three_state_json();
  j["delays"]["M"][0][0] = "1.5";
  EXPECT_EQ(kind_of([&] { io::parse_system(j); }), ErrorKind::rational_parse_error);

  const auto bad = temp_path("bad.json");
  std::ofstream(bad) << "{ \"d\": 3,";
  EXPECT_EQ(kind_of([&] { io::load_system(bad); }), ErrorKind::schema_error);
}

TEST(SystemFile, DependentBasisIsRejected) {
  Json j = three_state_json();
  j["delays"] = Json{{"basis", {"1", "1.41421356237309504880"}}, {"M", {{1, 0}, {2, 0}}}};
  EXPECT_EQ(kind_of([&] { io::parse_system(j); }), ErrorKind::rank_deficient_basis);
}

TEST(Scalars, LiteralRules) {
  EXPECT_EQ(*io::parse_scalar(Json(3), ScalarMode::exact).exact, ExactComplex(3));
  EXPECT_EQ(*io::parse_scalar(Json("-6/4"), ScalarMode::exact).exact, ExactComplex(make_rational(-3, 2)));
  EXPECT_FALSE(io::parse_scalar(Json("0.5"), ScalarMode::numeric).exact.has_value());
  EXPECT_EQ(io::parse_scalar(Json("0.5"), ScalarMode::numeric).numeric, Complex(0.5, 0.0));
  const auto z = io::parse_scalar(Json::array({"1/3", -2}), ScalarMode::exact);
  EXPECT_EQ(*z.exact, ExactComplex(make_rational(1, 3), make_rational(-2)));
  EXPECT_EQ(io::scalar_to_json(*z.exact), Json::array({"1/3", "-2/1"}));
  EXPECT_EQ(io::scalar_to_json(Complex(0.25, 0.0)), Json(0.25));
}

TEST(Plans, ExactPointPlanRoundTrip) {
  const auto file = io::load_system(fixture("euler_d3_k2.json"));
  const DelaySystem<ExactComplex> sys(file.system.exact(), file.delays);
  const SignalFunction<EF> x0 = file.signal("x0")->to_polynomial<EF>();
  const Vec<EF> x1{ExactComplex(1), ExactComplex(make_rational(-2, 3)), ExactComplex(5)};
  const auto plan = synthesize_point_control(sys, x0, x1, make_rational(9, 2), RankBackend::exact());
  const Json j = io::plan_to_json(plan, file.delays);
  const auto back = io::plan_from_json<EF>(j, file.delays);
  EXPECT_EQ(io::plan_to_json(back, file.delays).dump(), j.dump());
  EXPECT_EQ(solve_explicit(sys, x0, plan_signal(back), make_rational(9, 2)), x1);
}

TEST(Plans, TrackingPlanRoundTripKeepsResidual) {
  const auto file = io::load_system(fixture("euler_d3_k2.json"));
  const DelaySystem<ExactComplex> sys(file.system.exact(), file.delays);
  const SignalFunction<EF> x0 = file.signal("x0")->to_polynomial<EF>();
  const SignalFunction<EF> x1 = file.signal("x1")->to_polynomial<EF>();
  const auto plan = synthesize_tracking_control(sys, x0, x1, make_rational(5), make_rational(1, 4), RankBackend::exact());
  const Json j = io::plan_to_json(plan, file.delays);
  const auto back = io::plan_from_json<EF>(j, file.delays);
  EXPECT_EQ(io::plan_to_json(back, file.delays).dump(), j.dump());
  EXPECT_EQ(plan_residual(sys, x0, back, x1), 0.0);
}

TEST(Plans, NumericPlanRoundTrip) {
  const auto file = io::load_system(fixture("three_state_sqrt2.json"));
  const DelaySystem<Complex> sys(file.system.numeric(), file.delays);
  const Vec<NF> x1{{1.0, 0.0}, {2.0, 0.0}, {-0.5, 0.0}};
  const auto zero = PiecewisePolynomial<NF>::constant(Vec<NF>(3, Complex{}), -std::numbers::sqrt2, 0.0);
  const auto plan = synthesize_point_control(sys, SignalFunction<NF>(zero), x1, 3.0, RankBackend::numeric());
  const Json j = io::plan_to_json(plan, file.delays);
  const auto back = io::plan_from_json<NF>(j, file.delays);
  EXPECT_EQ(io::plan_to_json(back, file.delays).dump(), j.dump());
}

TEST(Plans, EvaluatorSegmentsCannotBeWritten) {
  const auto file = io::load_system(fixture("euler_d3_k2.json"));
  const DelaySystem<ExactComplex> sys(file.system.exact(), file.delays);
  const SignalFunction<EF> x0 = SignalFunction<EF>::zero(3);
  const SignalFunction<EF> x1 = file.signal("x1")->to_polynomial<EF>();
  const auto plan = synthesize_tracking_control(sys, x0, x1, make_rational(5), make_rational(1, 4), RankBackend::exact());
  EXPECT_EQ(kind_of([&] { io::plan_to_json(plan, file.delays); }), ErrorKind::invalid_argument);
}

TEST(Reports, RunReportRoundTrip) {
  io::RunReport r;
  r.command = "check";
  r.inputs_digest = "0123456789abcdef";
  r.arguments = {{"time", "3/2"}};
  r.result = {{"verdict", true}, {"rank", 3}};
  r.timings = {{"total_ms", 1.25}};
  EXPECT_EQ(io::report_from_json(io::report_to_json(r)), r);
}

TEST(Reports, Fnv1aReferenceValues) {
  EXPECT_EQ(io::fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(io::fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(io::fnv1a64("foobar"), 0x85944171f73967e8ULL);
  EXPECT_EQ(io::digest_hex(0xabcULL), "0000000000000abc");
}

TEST(Reports, DescribeTime) {
  const auto half = io::load_system(fixture("three_state_half.json")).delays;
  EXPECT_EQ(io::describe_time(half.stamp({8}), half), "4 = 4/1 (exact)");
  EXPECT_EQ(io::describe_time(half.stamp({3}), half), "1.5 = 3/2 (exact)");
  const auto irr = io::load_system(fixture("three_state_sqrt2.json")).delays;
  const std::string s = io::describe_time(irr.stamp({1, 2}), irr);
  EXPECT_NE(s.find("(basis combination)"), std::string::npos) << s;
}

TEST(Reports, TrajectoryCsv) {
  std::ostringstream real_out;
  io::write_trajectory_csv<EF>(real_out, {make_rational(0), make_rational(1, 2)},
                               {{ExactComplex(1), ExactComplex(2)}, {ExactComplex(make_rational(1, 4)), ExactComplex(0)}});
  EXPECT_EQ(real_out.str(), "t,x1,x2\n0,1,2\n0.5,0.25,0\n");
  std::ostringstream complex_out;
  io::write_trajectory_csv<NF>(complex_out, {1.0}, {{Complex(1.0, -2.0)}});
  EXPECT_EQ(complex_out.str(), "t,x1_re,x1_im\n1,1,-2\n");
}

TEST(Cli, CheckIrrationalFixtureIsTrue) {
  const CliRun r = run({"check", fixture("three_state_sqrt2.json").string(), "--time", "1.5"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find(": yes"), std::string::npos) << r.out;
}

TEST(Cli, CheckRationalFixtureIsFalse) {
  const CliRun r = run({"check", fixture("three_state_half.json").string(), "--time", "5"});
  EXPECT_EQ(r.code, 3) << r.err;
  EXPECT_NE(r.out.find(": no"), std::string::npos) << r.out;
}

TEST(Cli, MintimeEulerForm) {
  const CliRun r = run({"mintime", fixture("euler_d3_k2.json").string()});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "T_min: 4 = 4/1 (exact)\n");
}

TEST(Cli, MintimeNeverControllable) {
  EXPECT_EQ(run({"mintime", fixture("four_state_remark.json").string()}).code, 3);
  EXPECT_EQ(run({"mintime", fixture("three_state_half.json").string()}).code, 3);
}

TEST(Cli, CkCheckIsStrict) {
  // The two-state system first reaches full rank at the class time 1/2.
  EXPECT_EQ(run({"check", fixture("two_state_remark.json").string(), "--time", "1/2"}).code, 0);
  EXPECT_EQ(run({"ck-check", fixture("two_state_remark.json").string(), "--time", "1/2"}).code, 3);
  EXPECT_EQ(run({"ck-check", fixture("two_state_remark.json").string(), "--time", "0.51"}).code, 0);
}

TEST(Cli, JsonReportsAreDeterministic) {
  const auto a = temp_path("a.json");
  const auto b = temp_path("b.json");
  const std::string sys = fixture("three_state_sqrt2.json").string();
  EXPECT_EQ(run({"--report", a.string(), "check", sys, "--time", "2"}).code, 0);
  EXPECT_EQ(run({"check", sys, "--time", "2", "--report", b.string()}).code, 0);
  Json ja = read(a);
  Json jb = read(b);
  EXPECT_EQ(ja["inputs_digest"], jb["inputs_digest"]);
  ja.erase("timings");
  jb.erase("timings");
  EXPECT_EQ(ja.dump(), jb.dump());
  EXPECT_EQ(ja["result"]["verdict"], true);

  const CliRun other = run({"--json", "check", sys, "--time", "3"});
  EXPECT_NE(Json::parse(other.out)["inputs_digest"], ja["inputs_digest"]);
  EXPECT_EQ(io::report_to_json(io::report_from_json(Json::parse(other.out))), Json::parse(other.out));
}

TEST(Cli, SynthesizeAndSimulate) {
  const std::string sys = fixture("euler_d3_k2.json").string();
  const auto plan = temp_path("plan.json");
  const auto csv = temp_path("traj.csv");
  const CliRun s = run({"--json", "synthesize", sys, "--time", "5", "--track", "--plan-out", plan.string()});
  ASSERT_EQ(s.code, 0) << s.err;
  EXPECT_EQ(Json::parse(s.out)["result"]["residual"], 0.0);
  EXPECT_EQ(read(plan)["kind"], "tracking");

  const CliRun sim = run({"simulate", sys, "--until", "11/2", "--samples", "12", "--plan", plan.string(), "--out", csv.string()});
  ASSERT_EQ(sim.code, 0) << sim.err;
  std::ifstream in(csv);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  ASSERT_EQ(lines.size(), 13u);
  EXPECT_EQ(lines[0], "t,x1,x2,x3");
  // Samples at 5 and 5.25 lie in the tracked window: x1(s) = (1 + 2s, 0, -1 + 3s^2).
  EXPECT_EQ(lines[11], "5,1,0,-1");
  const CliRun point = run({"synthesize", sys, "--time", "5", "--target", "1,1/2,-3"});
  EXPECT_EQ(point.code, 0) << point.err;
}

TEST(Cli, SynthesizeUncontrollableExitsThree) {
  const CliRun r = run({"synthesize", fixture("three_state_half.json").string(), "--time", "5", "--target", "1,0,0"});
  EXPECT_EQ(r.code, 3) << r.err;
}

TEST(Cli, CompareReduceSurrogate) {
  const std::string irr = fixture("three_state_sqrt2.json").string();
  const std::string half = fixture("three_state_half.json").string();
  const CliRun c = run({"--json", "compare", irr, "--other", half});
  EXPECT_EQ(c.code, 0);
  EXPECT_EQ(Json::parse(c.out)["result"]["lambda_leq_other"], true);
  EXPECT_EQ(run({"compare", half, "--other", irr}).code, 3);
  EXPECT_EQ(run({"reduce", irr, "--other", half}).code, 0);
  const CliRun s = run({"--json", "surrogate", irr, "--time", "3", "--eps", "0.01"});
  ASSERT_EQ(s.code, 0) << s.err;
  EXPECT_GT(Json::parse(s.out)["result"]["n"].get<int>(), 0);
}

TEST(Cli, UsageAndLibraryErrors) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"check", fixture("three_state_half.json").string()}).code, 2);
  EXPECT_EQ(run({"check", "/no/such/file.json", "--time", "1"}).code, 2);
  EXPECT_EQ(run({"synthesize", fixture("euler_d3_k2.json").string(), "--time", "5"}).code, 2);
  const CliRun bad_time = run({"check", fixture("three_state_half.json").string(), "--time", "soon"});
  EXPECT_EQ(bad_time.code, 1);
  EXPECT_NE(bad_time.err.find("RationalParseError"), std::string::npos) << bad_time.err;
}

TEST(SystemFile, ZeroDelayIsRejected) {
  Json j = three_state_json();
  j["delays"]["M"] = Json{{1, 0}, {0, 0}};
  EXPECT_EQ(kind_of([&] { io::parse_system(j); }), ErrorKind::zero_delay);
}
