#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "tmlab/cli.hpp"

namespace fs = std::filesystem;
using tmlab::Json;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
};

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("tmlab_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

Outcome run(const std::string& args, const std::string& env = "") {
  const auto log = fs::temp_directory_path() / "tmlab_cli_test_stdout.txt";
  const std::string cmd = env + " '" + std::string(TMLAB_CLI_PATH) + "' " + args + " > '" + log.string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  Outcome o;
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  o.out = ss.str();
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json read_json(const fs::path& p) { return Json::parse(slurp(p)); }

}  // namespace

TEST(Cli, ParamsDimensionTwo) {
  const auto o = run("params --dim 2");
  EXPECT_EQ(o.code, 0);
  EXPECT_NE(o.out.find("mu_N     = 12.566370614359172"), std::string::npos) << o.out;
}

TEST(Cli, ParamsDimensionFour) {
  const auto o = run("params --dim 4");
  EXPECT_EQ(o.code, 0);
  EXPECT_NE(o.out.find("c_N      = 29.6088132032680"), std::string::npos) << o.out;
}

TEST(Cli, OddDimensionIsArgumentError) {
  const auto o = run("params --dim 3");
  EXPECT_EQ(o.code, 2);
  EXPECT_NE(o.out.find("N = 2k"), std::string::npos);
}

TEST(Cli, ParseErrorsExitTwo) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("params --dim two").code, 2);
  EXPECT_EQ(run("params --f cubic").code, 2);
  EXPECT_EQ(run("solve --damping 2").code, 2);
  EXPECT_EQ(run("solve --init spline").code, 2);
  EXPECT_EQ(run("sweep --mode gamma --out " + scratch("badmode").string()).code, 2);
  EXPECT_EQ(run("check").code, 2);
}

TEST(Cli, HelpExitsZero) { EXPECT_EQ(run("--help").code, 0); }

TEST(Cli, ConfigFileAndOverrides) {
  const auto dir = scratch("config");
  fs::create_directories(dir);
  std::ofstream(dir / "cfg.json") << R"({"dim": 4, "quadrature": {"panels": 48}})";
  auto o = run("params --config " + (dir / "cfg.json").string());
  EXPECT_EQ(o.code, 0);
  EXPECT_NE(o.out.find("N        = 4"), std::string::npos);
  o = run("params --dim 6 --config " + (dir / "cfg.json").string());
  EXPECT_NE(o.out.find("N        = 6"), std::string::npos);
  std::ofstream(dir / "bad.json") << R"({"dimension": 4})";
  EXPECT_EQ(run("params --config " + (dir / "bad.json").string()).code, 2);
  std::ofstream(dir / "broken.json") << R"({"dim": )";
  EXPECT_EQ(run("params --config " + (dir / "broken.json").string()).code, 2);
  EXPECT_EQ(run("params --config " + (dir / "missing.json").string()).code, 2);
}

TEST(Cli, IdentitiesSuite) {
  const auto dir = scratch("identities");
  EXPECT_EQ(run("identities --out " + dir.string()).code, 0);
  const auto text = slurp(dir / "identities.csv");
  EXPECT_EQ(text.rfind("identity,x,y,lhs,rhs,residual,passed\n", 0), 0u);
  EXPECT_EQ(text.find('\r'), std::string::npos);
}

TEST(Cli, FamiliesTables) {
  const auto dir = scratch("families");
  EXPECT_EQ(run("families --out " + dir.string()).code, 0);
  EXPECT_TRUE(fs::exists(dir / "moser.csv"));
  EXPECT_TRUE(fs::exists(dir / "conc.csv"));
}

TEST(Cli, BoundsDefault) {
  const auto dir = scratch("bounds");
  EXPECT_EQ(run("bounds --out " + dir.string()).code, 0);
  const auto j = read_json(dir / "certificate.json");
  EXPECT_NEAR(j["concentration_upper"].get<double>(), 1.8591409142295, 1e-12);
  for (const char* f : {"witness.csv", "blowup.csv", "profile.csv", "history.csv"}) EXPECT_TRUE(fs::exists(dir / f)) << f;
}

TEST(Cli, BoundsPerturbed) {
  const auto dir = scratch("bounds_f");
  EXPECT_EQ(run("bounds --f power:a=1,b=1,gamma=1 --out " + dir.string()).code, 0);
  const auto j = read_json(dir / "certificate.json");
  EXPECT_GT(j["witness"]["value"].get<double>(), 0.5);
  EXPECT_EQ(j["admissibility"]["verdict"], "pass");
}

TEST(Cli, BoundsDryRun) {
  const auto dir = scratch("dry");
  EXPECT_EQ(run("bounds --dry-run --out " + dir.string()).code, 0);
  EXPECT_NEAR(read_json(dir / "certificate.json")["witness"]["value"].get<double>(), 0.5, 1e-14);
}

TEST(Cli, BoundsComponentFailureExitsThree) {
  const auto dir = scratch("bounds_fail");
  fs::create_directories(dir);
  std::ofstream(dir / "cfg.json") << R"({"perturbation": "power:a=1,b=1,gamma=1", "j_list": [1, 2]})";
  EXPECT_EQ(run("bounds --config " + (dir / "cfg.json").string() + " --out " + dir.string()).code, 3);
  EXPECT_TRUE(fs::exists(dir / "certificate.json"));
}

TEST(Cli, UnwritableDirectoryExitsFour) {
  EXPECT_EQ(run("bounds --dry-run --out /proc/tmlab_no_such_dir").code, 4);
  const auto dir = scratch("file_not_dir");
  std::ofstream(dir.string()) << "x";
  EXPECT_EQ(run("solve --out " + dir.string()).code, 4);
  fs::remove(dir);
}

TEST(Cli, SolveReferenceProblem) {
  const auto dir = scratch("solve");
  EXPECT_EQ(run("solve --f power:a=1,b=1,gamma=1 --out " + dir.string()).code, 0);
  const auto j = read_json(dir / "solution.json");
  EXPECT_EQ(j["solution"]["status"], "converged");
  EXPECT_LT(j["solution"]["el_residual"].get<double>(), 1e-6);
  EXPECT_TRUE(fs::exists(dir / "profile.csv"));
  EXPECT_TRUE(fs::exists(dir / "history.csv"));
}

TEST(Cli, SolveZeroDampingExitsThree) {
  const auto dir = scratch("solve_d0");
  const auto o = run("solve --damping 0 --f power:a=1,b=1,gamma=1 --out " + dir.string());
  EXPECT_EQ(o.code, 3);
  EXPECT_NE(o.out.find("no progress"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "profile.csv"));
}

TEST(Cli, SolveMultistart) {
  const auto dir = scratch("solve_ms");
  EXPECT_EQ(run("solve --multistart 3 --f power:a=1,b=1,gamma=1 --out " + dir.string()).code, 0);
  const auto j = read_json(dir / "solution.json");
  EXPECT_EQ(j["starts"].size(), 3u);
  EXPECT_TRUE(j.contains("selected"));
}

TEST(Cli, CheckProfile) {
  const auto dir = scratch("check");
  ASSERT_EQ(run("solve --f power:a=1,b=1,gamma=1 --out " + dir.string()).code, 0);
  const auto o = run("check --profile " + (dir / "profile.csv").string());
  EXPECT_EQ(o.code, 0) << o.out;
  EXPECT_NE(o.out.find("\"verdict\": \"pass\""), std::string::npos);
  EXPECT_EQ(run("check --profile " + (dir / "nope.csv").string()).code, 4);
}

TEST(Cli, BetaSweep) {
  const auto dir = scratch("sweep_beta");
  EXPECT_EQ(run("sweep --mode beta --out " + dir.string()).code, 0);
  const auto rows = tmlab::read_csv((dir / "sweep.csv").string());
  ASSERT_EQ(rows.size(), 4u);
  double prev = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double v = std::stod(rows[i][2]);
    EXPECT_GE(v, prev);
    prev = v;
  }
  EXPECT_EQ(rows.back().back(), "1");
  EXPECT_EQ(rows[1].back(), "0");
}

TEST(Cli, GammaSweepFinite) {
  const auto dir = scratch("sweep_gamma");
  EXPECT_EQ(run("sweep --mode corollary --a 1 --b 0 --gamma=-1,0,1 --out " + dir.string()).code, 0);
  const auto rows = tmlab::read_csv((dir / "sweep.csv").string());
  ASSERT_EQ(rows.size(), 4u);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_EQ(rows[i][5], "1");
}

TEST(Cli, EmptyGridIsHeaderOnly) {
  const auto dir = scratch("sweep_empty");
  EXPECT_EQ(run("sweep --mode eps --grid \"\" --out " + dir.string()).code, 0);
  EXPECT_EQ(slurp(dir / "sweep.csv"), "eps,c,b,norm,value,refinement_delta\n");
}

TEST(Cli, SweepRowOrderIndependentOfThreads) {
  const auto a = scratch("sweep_t1"), b = scratch("sweep_t4");
  EXPECT_EQ(run("sweep --mode corollary --threads 1 --out " + a.string()).code, 0);
  EXPECT_EQ(run("sweep --mode corollary --threads 4 --out " + b.string()).code, 0);
  EXPECT_EQ(slurp(a / "sweep.csv"), slurp(b / "sweep.csv"));
  EXPECT_EQ(tmlab::read_csv((a / "sweep.csv").string()).size(), 19u);
}

TEST(Cli, EnvironmentOutputDirectory) {
  const auto dir = scratch("env");
  EXPECT_EQ(run("families", "TMLAB_OUT_DIR='" + dir.string() + "'").code, 0);
  EXPECT_TRUE(fs::exists(dir / "moser.csv"));
  const auto flag = scratch("env_flag");
  EXPECT_EQ(run("families --out " + flag.string(), "TMLAB_OUT_DIR='" + dir.string() + "_unused'").code, 0);
  EXPECT_TRUE(fs::exists(flag / "moser.csv"));
  EXPECT_FALSE(fs::exists(dir.string() + "_unused"));
}

TEST(Cli, IdenticalRunsIdenticalFiles) {
  const auto a = scratch("det_a"), b = scratch("det_b");
  for (const auto& d : {a, b}) ASSERT_EQ(run("solve --f power:a=1,b=1,gamma=1 --out " + d.string()).code, 0);
  for (const char* f : {"profile.csv", "history.csv"}) EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  auto ja = read_json(a / "solution.json"), jb = read_json(b / "solution.json");
  ja.erase("generated_at");
  jb.erase("generated_at");
  EXPECT_EQ(ja.dump(), jb.dump());
}

TEST(CliLibrary, ParseList) {
  EXPECT_EQ(tmlab::cli::parse_list("1, 2.5,3", "x"), (std::vector<double>{1, 2.5, 3}));
  EXPECT_TRUE(tmlab::cli::parse_list("", "x").empty());
  EXPECT_THROW(tmlab::cli::parse_list("1,a", "x"), tmlab::ConfigError);
}
