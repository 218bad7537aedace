#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "config.hpp"

namespace fs = std::filesystem;
using skipmon::cli::kExitConfig;
using skipmon::cli::kExitOk;
using skipmon::cli::kExitRuntime;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "skipmon");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = skipmon::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("skipmon_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p.string();
  }
  std::string out(const std::string& sub = "out") const { return (dir_ / sub).string(); }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
  }

  fs::path dir_;
};

const char* kSimConfig = R"({
  "n": 2000,
  "types": {"kind": "uniform"},
  "retention": {"dist": {"kind": "exponential", "lambda": 3}, "beta": 0.99},
  "scheme": "mt",
  "max_rounds": 100,
  "seed": 5
})";

}  // namespace

TEST_F(CliTest, HelpAndVersionExitZero) {
  EXPECT_EQ(invoke({"--help"}).code, kExitOk);
  EXPECT_EQ(invoke({"simulate", "--help"}).code, kExitOk);
  EXPECT_EQ(invoke({"--version"}).code, kExitOk);
}

TEST_F(CliTest, UsageErrorsAreConfigErrors) {
  EXPECT_EQ(invoke({}).code, kExitConfig);
  EXPECT_EQ(invoke({"bogus"}).code, kExitConfig);
  EXPECT_EQ(invoke({"simulate", "--config", write("c.json", kSimConfig), "--frobnicate"}).code, kExitConfig);
  EXPECT_EQ(invoke({"simulate"}).code, kExitConfig);  // --config is required
}

TEST_F(CliTest, ZeroPopulationIsRejected) {
  const auto r = invoke({"simulate", "--config", write("c.json", kSimConfig), "--n", "0", "--out", out()});
  EXPECT_EQ(r.code, kExitConfig);
  EXPECT_FALSE(fs::exists(out()));
}

TEST_F(CliTest, EmptyAndMalformedConfigs) {
  auto r = invoke({"simulate", "--config", write("empty.json", "  \n"), "--out", out()});
  EXPECT_EQ(r.code, kExitConfig);
  EXPECT_NE(r.err.find("empty"), std::string::npos);
  r = invoke({"simulate", "--config", write("bad.json", "{\n \"n\": 3,\n oops\n}"), "--out", out()});
  EXPECT_EQ(r.code, kExitConfig);
  EXPECT_NE(r.err.find("line 3"), std::string::npos) << r.err;
  r = invoke({"simulate", "--config", (dir_ / "missing.json").string(), "--out", out()});
  EXPECT_EQ(r.code, kExitConfig);
}

TEST_F(CliTest, ConfigErrorsNameTheField) {
  const auto r = invoke({"simulate", "--config",
                         write("c.json", R"({"retention": {"dist": {"kind": "exponential", "lambda": -1}, "beta": 0.9}})"),
                         "--out", out()});
  EXPECT_EQ(r.code, kExitConfig);
  EXPECT_NE(r.err.find("retention"), std::string::npos) << r.err;
}

TEST_F(CliTest, UnknownStudyAndScheme) {
  EXPECT_EQ(invoke({"study", "--study", "nope", "--out", out()}).code, kExitConfig);
  EXPECT_EQ(invoke({"simulate", "--config", write("c.json", kSimConfig), "--scheme", "nope", "--out", out()}).code,
            kExitConfig);
}

TEST_F(CliTest, UnwritableOutputIsARuntimeError) {
  const std::string blocker = write("blocker", "x");
  const auto r = invoke({"simulate", "--config", write("c.json", kSimConfig), "--out", blocker});
  EXPECT_EQ(r.code, kExitRuntime) << r.err;
}

TEST_F(CliTest, SimulateIsDeterministicInTheSeed) {
  const std::string cfg = write("c.json", kSimConfig);
  ASSERT_EQ(invoke({"simulate", "--config", cfg, "--out", out("a")}).code, kExitOk);
  ASSERT_EQ(invoke({"simulate", "--config", cfg, "--out", out("b")}).code, kExitOk);
  ASSERT_EQ(invoke({"simulate", "--config", cfg, "--seed", "6", "--out", out("c")}).code, kExitOk);
  const auto traj = [&](const char* sub) { return slurp(dir_ / sub / "simulate" / "trajectory.csv"); };
  EXPECT_EQ(traj("a"), traj("b"));
  EXPECT_NE(traj("a"), traj("c"));
  EXPECT_TRUE(fs::exists(dir_ / "a" / "simulate" / "manifest.json"));
  EXPECT_TRUE(fs::exists(dir_ / "a" / "simulate" / "result.json"));
}

TEST_F(CliTest, KnownTypesReportsClosedForm) {
  const auto r = invoke({"simulate", "--config", write("c.json", kSimConfig), "--scheme", "known-types",
                         "--n", "20000", "--out", out()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("closed form"), std::string::npos);
}

TEST_F(CliTest, SingleWritesReport) {
  const auto r = invoke({"single", "--config",
                         write("s.json", R"({"types": {"kind": "uniform"},
                                            "value_function": {"kind": "poly", "k": 2, "p_bar": 1},
                                            "curve_points": 11})"),
                         "--out", out()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_TRUE(fs::exists(dir_ / "out" / "single" / "report.json"));
  std::ifstream curve(dir_ / "out" / "single" / "curve_0.csv");
  std::string line;
  std::size_t lines = 0;
  while (std::getline(curve, line)) ++lines;
  EXPECT_EQ(lines, 12u);
}

TEST_F(CliTest, TinyStudyRuns) {
  const auto r = invoke({"study", "--study", "scaling", "--config",
                         write("g.json", R"({"n": 500, "replicates": 1, "max_rounds": 50,
                           "grid": {"type_dists": [{"kind": "uniform"}],
                                    "retention_dists": [{"kind": "exponential", "lambda": 3}],
                                    "betas": [0.99], "growth_rates": [0], "retention_modes": ["shared"],
                                    "scales": [0.5]}})"),
                         "--threads", "1", "--out", out()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_TRUE(
fs::exists(dir_ / "out" / "scaling" / "summary.csv"));
}

TEST(CliConfig, GridOverridesKeepScaleOneFirst) {
  const auto spec = skipmon::cli::parse_grid(nlohmann::json::parse(R"({"scales": [0.5, 0.25]})"),
                                             skipmon::StudyKind::Scaling);
  ASSERT_EQ(spec.scales.size(), 3u);
  EXPECT_DOUBLE_EQ(spec.scales[0], 1.0);
  EXPECT_THROW(skipmon::cli::parse_grid(nlohmann::json::parse(R"({"betas": [1.5]})"), skipmon::StudyKind::Main),
               skipmon::cli::ConfigError);
}
