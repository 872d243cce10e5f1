#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "polysr/cli.hpp"
#include "support.hpp"

using namespace polysr;
using namespace polysr::cli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("polysr_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  int call(std::vector<std::string> args) {
    args.insert(args.begin(), "polysr");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    out_.str("");
    err_.str("");
    return run(static_cast<int>(argv.size()), argv.data(), out_, err_);
  }

  json read_json(const std::string& name) const { return json::parse(read_text_file(path(name))); }

  fs::path dir_;
  std::ostringstream out_, err_;
};

}  // namespace

TEST(CliExitCodes, Mapping) {
  EXPECT_EQ(exit_code_for(ErrorCode::validation), kExitValidation);
  EXPECT_EQ(exit_code_for(ErrorCode::parse), kExitValidation);
  EXPECT_EQ(exit_code_for(ErrorCode::separation), kExitValidation);
  EXPECT_EQ(exit_code_for(ErrorCode::inconsistent), kExitSolver);
  EXPECT_EQ(exit_code_for(ErrorCode::order_estimation), kExitSolver);
  EXPECT_EQ(exit_code_for(ErrorCode::infeasible), kExitSolver);
  EXPECT_EQ(exit_code_for(ErrorCode::io), kExitIo);
}

TEST(CliJson, ProblemRoundTrip) {
  ProblemFile p;
  p.kind = ProblemKind::spline;
  p.basis = {BasisKind::legendre, 2};
  p.moments = {cdouble(1, 2), 0.5, cdouble(-0.25, 1e-17)};
  p.spline = SplineRecord{0, {cdouble(3, 0)}, {cdouble(0, -1)}};
  const ProblemFile q = parse_problem(dump_problem(p));
  EXPECT_EQ(q.kind, p.kind);
  EXPECT_EQ(q.basis, p.basis);
  EXPECT_EQ(q.moments, p.moments);  // bit-exact
  ASSERT_TRUE(q.spline);
  EXPECT_EQ(q.spline->boundary_right, p.spline->boundary_right);
}

TEST(CliJson, ParseErrorsCarryPosition) {
  try {
    parse_problem("{\n  \"kind\": \"spikes\",\n  \"N\": 3,\n  \"moments\": [1, 2,");
    FAIL() << "no exception";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::parse);
    EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos) << e.what();
  }
  EXPECT_POLYSR_ERROR(parse_problem(R"({"kind":"spikes","basis":"chebyshev","N":3,"moments":[1,2]})"),
                      ErrorCode::validation);
  EXPECT_POLYSR_ERROR(parse_problem(R"({"kind":"blobs","basis":"chebyshev","N":0,"moments":[1]})"),
                      ErrorCode::validation);
}

TEST(CliJson, TruthRoundTripAndProject) {
  const Truth t = DiracMeasure({{-0.5, cdouble(0, 1)}, {0.25, 2.0}});
  const Truth back = parse_truth(dump_truth(t));
  const auto& m = std::get<DiracMeasure>(back);
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m.atoms()[0].weight, cdouble(0, 1));
  const ProblemFile p = project(back, {BasisKind::chebyshev, 4});
  ASSERT_EQ(p.moments.size(), 5u);
  EXPECT_NEAR(std::abs(p.moments[0] - cdouble(2, 1)), 0.0, 1e-15);
  const Truth t2 = DiracMeasure2D({{{0.1, -0.2}, 1.5}});
  const ProblemFile p2 = project(parse_truth(dump_truth(t2)), {BasisKind::chebyshev, 3});
  EXPECT_EQ(p2.kind, ProblemKind::spikes2d);
  EXPECT_EQ(p2.moments.size(), 16u);
}

TEST(CliGenerate, DeterministicAndSeparated) {
  GenOptions o;
  o.M = 10;
  o.N = 128;
  o.seed = 99;
  const auto a = generate(o), b = generate(o);
  EXPECT_EQ(a.problem.moments, b.problem.moments);
  const auto& m = std::get<DiracMeasure>(a.truth);
  EXPECT_TRUE(check_separation(m.locations(), 128).satisfied);
  o.M = 100;
  EXPECT_POLYSR_ERROR(generate(o), ErrorCode::validation);
  const auto t = draw_separated_angles(5, 64, 4.0, 3);
  for (std::size_t i = 1; i < t.size(); ++i) EXPECT_GE(t[i] - t[i - 1], 4 * test::kPi / 64 - 1e-12);
}

TEST_F(CliTest, GenRecoverSpikes) {
  ASSERT_EQ(call({"--seed", "5", "--output", path("p.json"), "gen", "--M", "6", "--N", "64"}), 0)
      << err_.str();
  EXPECT_TRUE(fs::exists(path("p.truth.json")));
  ASSERT_EQ(call({"--input", path("p.json"), "--output", path("r.json"), "recover"}), 0) << err_.str();
  const json r = read_json("r.json");
  EXPECT_EQ(r["status"], "ok");
  EXPECT_EQ(r["atoms"].size(), 6u);
  EXPECT_LT(r["residual"].get<double>(), 1e-10);
  EXPECT_TRUE(r.contains("timing_ms"));
  const auto truth = std::get<DiracMeasure>(parse_truth(read_text_file(path("p.truth.json"))));
  for (std::size_t i = 0; i < truth.size(); ++i)
    EXPECT_NEAR(r["atoms"][i]["location"].get<double>(), truth.atoms()[i].location, 1e-9);
  ASSERT_EQ(call({"--no-timing", "--input", path("p.json"), "--output", path("r2.json"), "recover"}), 0);
  EXPECT_FALSE(read_json("r2.json").contains("timing_ms"));
}

TEST_F(CliTest, ProjectMatchesGen) {
  ASSERT_EQ(call({"--seed", "8", "--output", path("p.json"), "gen", "--M", "3", "--N", "32",
                  "--basis", "legendre", "--truth", path("t.json")}),
            0);
  ASSERT_EQ(call({"--input", path("t.json"), "--output", path("q.json"), "project", "--N", "32",
                  "--basis", "legendre"}),
            0)
      << err_.str();
  EXPECT_EQ(read_text_file(path("p.json")), read_text_file(path("q.json")));
}

TEST_F(CliTest, LpOnComplexMomentsIsValidationError) {
  ASSERT_EQ(call({"--seed", "5", "--output", path("p.json"), "gen", "--M", "3", "--N", "32"}), 0);
  EXPECT_EQ(call({"--method", "lp", "--input", path("p.json"), "--output", path("r.json"), "recover"}),
            kExitValidation);
  const json r = read_json("r.json");
  EXPECT_EQ(r["status"], "error");
  EXPECT_EQ(r["error"]["code"], "validation");
}

TEST_F(CliTest, LpOnSignedMoments) {
  ASSERT_EQ(call({"--seed", "2", "--output", path("p.json"), "gen", "--M", "3", "--N", "32",
                  "--weights", "signed"}),
            0);
  ASSERT_EQ(call({"--method", "lp", "--input", path("p.json"), "--output", path("r.json"), "recover"}), 0)
      << err_.str();
  EXPECT_TRUE(read_json("r.json").contains("lp_objective"));
}

TEST_F(CliTest, MalformedJsonExit2) {
  write_text_file(path("bad.json"), "{\"kind\": \"spikes\",\n \"N\": ");
  EXPECT_EQ(call({"--input", path("bad.json"), "--output", path("r.json"), "recover"}), kExitValidation);
  const json r = read_json("r.json");
  EXPECT_EQ(r["error"]["code"], "parse");
  EXPECT_NE(r["error"]["message"].get<std::string>().find("line 2"), std::string::npos);
}

TEST_F(CliTest, MissingInputExit4) {
  EXPECT_EQ(call({"--input", path("nope.json"), "recover"}), kExitIo);
}

TEST_F(CliTest, InfeasibleGenExit2) {
  EXPECT_EQ(call({"--output", path("p.json"), "gen", "--M", "100", "--N", "128"}), kExitValidation);
  EXPECT_NE(read_json("p.json")["error"]["message"].get<std::string>().find("M * factor * pi / N"),
            std::string::npos);
}

TEST_F(CliTest, SplineGenRecover) {
  ASSERT_EQ(call({"--seed", "4", "--output", path("s.json"), "gen", "--kind", "spline", "--M", "3",
                  "--N", "128", "--degree", "2"}),
            0);
  ASSERT_EQ(call({"--input", path("s.json"), "--output", path("r.json"), "recover"}), 0) << err_.str();
  const json r = read_json("r.json");
  EXPECT_EQ(r["degree_r"], 2);
  EXPECT_EQ(r["knots"].size(), 3u);
  EXPECT_LT(r["residual"].get<double>(), 1e-6);
}

TEST_F(CliTest, Spikes2dOnGridRecover) {
  const int N = 16;
  const auto grid = lp_grid(2 * N + 1);
  const Truth t = DiracMeasure2D({{{grid[6], grid[20]}, 1.0}, {{grid[24], grid[9]}, -0.5}});
  write_text_file(path("t.json"), dump_truth(t));
  ASSERT_EQ(call({"--input", path("t.json"), "--output", path("p.json"), "project", "--N", "16"}), 0);
  ASSERT_EQ(call({"--input", path("p.json"), "--output", path("r.json"), "recover"}), 0) << err_.str();
  const json r = read_json("r.json");
  EXPECT_EQ(r["atoms"].size(), 2u);
  EXPECT_LT(r["residual"].get<double>(), 1e-8);
}

TEST_F(CliTest, CertifyPassAndViolation) {
  ASSERT_EQ(call({"--output", path("c.json"), "certify", "--N", "128", "--knots", "-0.5,0.1,0.6",
                  "--values", "1,-1,1", "--samples", path("s.csv")}),
            0)
      << err_.str();
  const json c = read_json("c.json");
  EXPECT_TRUE(c["report"]["passed"].get<bool>());
  EXPECT_EQ(read_text_file(path("s.csv")).rfind("x,t,re_p,im_p,abs_p\n", 0), 0u);

  EXPECT_EQ(call({"--output", path("v.json"), "certify", "--N", "128", "--knots", "0.1,0.1001"}),
            kExitValidation);
  EXPECT_FALSE(read_json("v.json")["constructed"].get<bool>());

  write_text_file(path("in.json"),
                  R"({"N": 128, "knots": [-0.5, 0.6], "values": [[0, 1], [1, 0]]})");
  ASSERT_EQ(call({"--input", path("in.json"), "--output", path("c2.json"), "certify"}), 0) << err_.str();
  EXPECT_TRUE(read_json("c2.json")["report"]["passed"].get<bool>());
}

TEST_F(CliTest, Certify2d) {
  write_text_file(path("in.json"),
                  R"({"kind": "spikes2d", "N": 32, "locations": [[0.5, 0.5], [-0.5, -0.3]], "signs": [1, -1]})");
  ASSERT_EQ(call({"--input", path("in.json"), "--output", path("c.json"), "certify"}), 0) << err_.str();
  const json c = read_json("c.json");
  EXPECT_EQ(c["kind"], "certificate2d");
  EXPECT_TRUE(c["report"]["passed"].get<bool>());
}

TEST_F(CliTest, PhaseCsvIndependentOfParallelism) {
  const std::vector<std::string> common{"--seed", "3", "--no-timing"};
  auto args = [&](const std::string& par, const std::string& out) {
    std::vector<std::string> a = common;
    a.insert(a.end(), {"--parallelism", par, "--output", path(out), "phase", "--trials", "3",
                       "--steps", "3", "--sep-min", "2", "--sep-max", "4", "--N", "32", "--M", "3"});
    return a;
  };
  ASSERT_EQ(call(args("1", "a.csv")), 0) << err_.str();
  ASSERT_EQ(call(args("3", "b.csv")), 0) << err_.str();
  const std::string a = read_text_file(path("a.csv"));
  EXPECT_EQ(a, read_text_file(path("b.csv")));
  EXPECT_EQ(a.rfind("factor,sep_radians,pencil_success_rate,lp_success_rate,mean_runtime_ms\n", 0), 0u);
  EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 4);
}

TEST_F(CliTest, UnknownOptionIsUsageError) {
  EXPECT_EQ(call({"gen", "--bogus"}), kExitValidation);
  EXPECT_EQ(call({"--method", "prony", "recover"}), kExitValidation);
}

TEST_F(CliTest, ExecutableExitStatus) {
  const std::string cmd = std::string(POLYSR_TOOL_PATH) + " --output " + path("p.json") +
                          " gen --M 100 --N 128 2>/dev/null";
  const int status = std::system(cmd.c_str());
  ASSERT_TRUE(WIFEXITED(status));
  EXPECT_EQ(WEXITSTATUS(status), kExitValidation);
  const std::string ok = std::string(POLYSR_TOOL_PATH) + " --output " + path("p.json") +
                         " gen --M 2 --N 32 2>/dev/null";
  EXPECT_EQ(WEXITSTATUS(std::system(ok.c_str())), 0);
}
