#include "cli.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "vartsp/error.hpp"
#include "vartsp/tsp.hpp"

namespace vartsp::cli {
namespace {

namespace fs = std::filesystem;

const fs::path kData = fs::path(VARTSP_SOURCE_DIR) / "data";

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result call(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Result r;
  r.code = run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path temp(const std::string& name) { return fs::temp_directory_path() / name; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

TEST(CliTest, SolveDefaults) {
  const RunSettings s = solve_settings({"x.csv"});
  EXPECT_EQ(s.vqa.iterations, 250u);
  EXPECT_EQ(s.codec, CodecKind::kNonFactorial);
  EXPECT_FALSE(s.vqa.warm_start);
  EXPECT_FALSE(s.gray);
  EXPECT_EQ(s.vqa.circuit, 2);
  EXPECT_EQ(s.vqa.shots, 1024u);
  EXPECT_EQ(s.vqa.slice, 0.8);
  EXPECT_EQ(s.ml.input, InputMode::kZeros);
}

TEST(CliTest, FlagsParse) {
  const RunSettings s = solve_settings(
      {"x.csv", "--circuit", "4", "--gray", "--codec", "factorial", "--no-cache", "--shots", "64"});
  EXPECT_EQ(s.vqa.circuit, 4);
  EXPECT_TRUE(s.gray);
  EXPECT_EQ(s.codec, CodecKind::kFactorial);
  EXPECT_FALSE(s.vqa.caching);
  EXPECT_EQ(s.vqa.shots, 64u);
  EXPECT_THROW(solve_settings({"x.csv", "--circuit", "two"}), ConfigError);
}

TEST(CliTest, ConfigFileThenFlags) {
  const fs::path cfg = temp("vartsp_cfg.json");
  std::ofstream(cfg) << R"({"circuit": 5, "shots": 128, "gray": true})";
  const RunSettings s =
      solve_settings({"x.csv", "--config", cfg.string(), "--shots", "32"});
  EXPECT_EQ(s.vqa.circuit, 5);
  EXPECT_EQ(s.vqa.shots, 32u);
  EXPECT_TRUE(s.gray);
}

TEST(CliTest, SolveUnitSquare) {
  const Result r = call({"solve", (kData / "sq4.csv").string(), "--model", "vqa",
                         "--circuit", "2"});
  EXPECT_EQ(r.code, kOk) << r.err;
  EXPECT_NE(r.out.find("quality      1\n"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("distance     4\n"), std::string::npos) << r.out;
}

TEST(CliTest, ZeroIterationsStillReports) {
  const Result r = call({"solve", (kData / "sq4.csv").string(), "--iterations", "0"});
  EXPECT_EQ(r.code, kOk) << r.err;
  EXPECT_NE(r.out.find("bit strings  1024\n"), std::string::npos) << r.out;
}

TEST(CliTest, SameSeedSameFiles) {
  const std::string inst = temp("vartsp_cli7.csv").string();
  ASSERT_EQ(call({"generate", "--n", "7", "--seed", "3", "--output", inst}).code, kOk);
  const std::string a = temp("vartsp_a.json").string();
  const std::string b = temp("vartsp_b.json").string();
  const std::string trace = temp("vartsp_t.csv").string();
  for (const std::string& out : {a, b}) {
    const Result r = call({"solve", inst, "--seed", "11", "--iterations", "20",
                           "--init-angle", "0.5", "--output", out, "--trace", trace});
    ASSERT_EQ(r.code, kOk) << r.err;
  }
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_EQ(slurp(a).find("wall_seconds"), std::string::npos);
  EXPECT_EQ(slurp(trace).rfind("t,sliced_avg,best\n", 0), 0u);
}

TEST(CliTest, ModelsRun) {
  const std::string sq = (kData / "sq4.csv").string();
  for (const char* model : {"ml", "monte_carlo", "greedy"}) {
    std::vector<std::string> args{"solve", sq, "--model", model, "--iterations", "5"};
    if (std::string(model) == "monte_carlo") {
      args.push_back("--budget");
      args.push_back("50");
    }
    const Result r = call(args);
    EXPECT_EQ(r.code, kOk) << model << ": " << r.err;
    EXPECT_NE(r.out.find(std::string("model        ") + model), std::string::npos);
  }
}

TEST(CliTest, ExitCodes) {
  EXPECT_EQ(call({"solve"}).code, kConfigError);
  EXPECT_EQ(call({"solve", "x.csv", "--slice", "1.5"}).code, kConfigError);
  EXPECT_EQ(call({"frobnicate"}).code, kConfigError);
  EXPECT_EQ(call({"solve", "/nonexistent/x.csv"}).code, kDataError);

  const std::string big = temp("vartsp_big.csv").string();
  ASSERT_EQ(call({"generate", "--n", "12", "--seed", "1", "--output", big}).code, kOk);
  const Result r = call({"solve", big, "--circuit", "2"});
  EXPECT_EQ(r.code, kResourceLimit);
  EXPECT_NE(r.err.find("25"), std::string::npos) << r.err;

  const std::string two = temp("vartsp_two.csv").string();
  std::ofstream(two) << "0,0\n1,1\n";
  EXPECT_EQ(call({"solve", two}).code, kDataError);
}

TEST(CliTest, OracleRefusesAboveGuard) {
  const std::string p = temp("vartsp_14.csv").string();
  ASSERT_EQ(call({"generate", "--n", "14", "--output", p}).code, kOk);
  const Result r = call({"oracle", p});
  EXPECT_EQ(r.code, kResourceLimit);
  EXPECT_NE(r.err.find("13"), std::string::npos) << r.err;
  const Result ok = call({"oracle", (kData / "sq4.csv").string()});
  EXPECT_EQ(ok.code, kOk);
  EXPECT_NE(ok.out.find("distance     4\n"), std::string::npos);
}

TEST(CliTest, Estimate) {
  const Result r = call({"estimate", "--iterations", "250", "--shots", "1024",
                         "--t-shot", "2e-6"});
  EXPECT_EQ(r.code, kOk);
  EXPECT_NE(r.out.find("= 2.048 s"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("t-shot       2e-6 s"), std::string::npos) << r.out;
  EXPECT_EQ(call({"estimate", "--shots", "many"}).code, kConfigError);
  EXPECT_EQ(call({"estimate", "--shots", "-1"}).code, kDataError);
}

TEST(CliTest, BenchmarkAndSweep) {
  const std::string csv = temp("vartsp_bench.csv").string();
  Result r = call({"benchmark", "--sizes", "4", "5", "--count", "2", "--runs", "2",
                   "--iterations", "5", "--monte-carlo", "--greedy", "--output", csv});
  ASSERT_EQ(r.code, kOk) << r.err;
  std::string text = slurp(csv);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1 + 6);

  const fs::path plan = temp("vartsp_plan.json");
  std::ofstream(plan) << R"({"runs": 1, "instances": [{"generate": {"n": 5, "seed": 2}}],
                             "grid": {"circuit": [4, 5]}, "base": {"iterations": 4}})";
  r = call({"sweep", plan.string(), "--jobs", "2"});
  ASSERT_EQ(r.code, kOk) << r.err;
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 3);
  EXPECT_EQ(call({"sweep", "/nonexistent.json"}).code, kDataError);
}

TEST(CliTest, GenerateIsSeeded) {
  const Result a = call({"generate", "--n", "6", "--seed", "9"});
  const Result b = call({"generate", "--n", "6", "--seed", "9"});
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(parse_instance(a.out).size(), 6u);
}

}  // namespace
}  // namespace vartsp::cli
