#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "shiftgen/cli.hpp"

using namespace shiftgen;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("shiftgen_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write_config(const std::string& text) {
    const auto p = dir_ / "exp.yaml";
    std::ofstream(p) << text;
    return p.string();
  }

  int run(std::vector<std::string> args) {
    std::vector<const char*> argv{"shiftgen"};
    for (const auto& a : args) argv.push_back(a.c_str());
    out_.str("");
    err_.str("");
    return run_command(static_cast<int>(argv.size()), argv.data(), out_, err_);
  }

  json report(const std::string& name) {
    std::ifstream f(dir_ / name);
    return json::parse(f);
  }

  std::string read(const std::string& name) {
    std::ifstream f(dir_ / name);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

}  // namespace

TEST_F(Cli, ExponentPairOracle) {
  const auto cfg = write_config("mc: {n: 1000000, master_seed: 5}\nexponent: {sites: [0, 1]}\n");
  ASSERT_EQ(run({"exponent", "-c", cfg, "-o", dir_.string()}), exit_ok) << err_.str();
  const auto r = report("exponent.json");
  const auto v = r["result"]["V"];
  EXPECT_NEAR(v["mean"].get<double>(), oracle::br_pair_exponent(1.0), 4.0 * v["se"].get<double>());
  EXPECT_EQ(r["seed"], 5);
  EXPECT_EQ(r["config"]["variogram"]["theta"], 1.0);
  EXPECT_EQ(json::parse(out_.str()), r);
}

TEST_F(Cli, IntegrateGaussianPdf) {
  const auto cfg = write_config("mc: {n: 1000000}\nintegrate: {integrand: {kind: gaussian_pdf}, half_width: 4}\n");
  ASSERT_EQ(run({"integrate", "-c", cfg, "-o", dir_.string(), "--seed", "77"}), exit_ok) << err_.str();
  const auto r = report("integrate.json")["result"];
  EXPECT_NEAR(r["mean"].get<double>(), oracle::normal_mass(4.0), 3.0 * r["se"].get<double>());
  EXPECT_EQ(report("integrate.json")["seed"], 77);
}

TEST_F(Cli, VerifyTrivialBoll22Passes) {
  const auto cfg = write_config(
      "mc: {n: 2000}\n"
      "verify:\n"
      "  identity: boll22\n"
      "  functional: {kind: constant, value: 1}\n"
      "  h: 0\n");
  EXPECT_EQ(run({"verify", "-c", cfg, "-o", dir_.string()}), exit_ok) << err_.str();
  const auto r = report("verify.json");
  EXPECT_EQ(r["verdict"], "pass");
  EXPECT_EQ(r["identity"], "boll22");
  EXPECT_EQ(r["left"]["mean"], 1.0);
  EXPECT_TRUE(r.contains("config"));
}

TEST_F(Cli, VerifyFailExitsOne) {
  const auto cfg = write_config(
      "mc: {n: 20000}\n"
      "verify:\n"
      "  identity: boll\n"
      "  functional: {kind: weighted_max, sites: [0, 1]}\n"
      "  h: 0\n"
      "  left: {kind: brown_resnick, variogram: {theta: 1}}\n"
      "  right: {kind: brown_resnick, variogram: {theta: 4}}\n");
  EXPECT_EQ(run({"verify", "-c", cfg, "-o", dir_.string()}), exit_fail);
  EXPECT_EQ(report("verify.json")["verdict"], "fail");
}

TEST_F(Cli, InconclusiveRespectsFlag) {
  // Z(5) with nu(5) = 80 is dominated by a handful of draws, so the standard errors swamp the means.
  const auto cfg = write_config(
      "mc: {n: 1000}\n"
      "verify:\n"
      "  identity: boll\n"
      "  functional: {kind: weighted_max, sites: [5]}\n"
      "  h: 1\n"
      "  left: {kind: brown_resnick, variogram: {theta: 16}}\n");
  EXPECT_EQ(run({"verify", "-c", cfg, "-o", dir_.string()}), exit_ok);
  EXPECT_EQ(report("verify.json")["verdict"], "inconclusive");
  EXPECT_EQ(run({"verify", "-c", cfg, "-o", dir_.string(), "--fail-on-inconclusive"}), exit_fail);
}

TEST_F(Cli, ConfigErrorsExitTwo) {
  const auto bad = write_config("mc:\n  n: 10\n  speed: fast\n");
  EXPECT_EQ(run({"exponent", "-c", bad, "-o", dir_.string()}), exit_config);
  EXPECT_NE(err_.str().find(":3:"), std::string::npos) << err_.str();
  EXPECT_NE(err_.str().find("speed"), std::string::npos);
  EXPECT_EQ(run({"exponent", "-c", (dir_ / "missing.yaml").string()}), exit_config);
  const auto ok = write_config("mc: {n: 1000}\n");
  EXPECT_EQ(run({"exponent", "-c", ok, "--set", "field.alpha=-1", "-o", dir_.string()}), exit_config);
  EXPECT_EQ(run({"nonsense"}), exit_config);
}

TEST_F(Cli, OverridesAreEchoed) {
  const auto cfg = write_config("mc: {n: 1000}\n");
  ASSERT_EQ(run({"exponent", "-c", cfg, "--set", "variogram.theta=4", "-o", dir_.string()}), exit_ok);
  const auto r = report("exponent.json");
  EXPECT_EQ(r["config"]["variogram"]["theta"], 4);
  EXPECT_EQ(r["config"]["overrides"][0], "variogram.theta=4");
}

TEST_F(Cli, SimulateWritesCsvWithHeader) {
  const auto cfg = write_config("mc: {master_seed: 3}\nsimulate: {sites: [0, 1, 2], n: 20, dehaan: {pilot_n: 500}}\n");
  ASSERT_EQ(run({"simulate-maxstable", "-c", cfg, "-o", dir_.string()}), exit_ok) << err_.str();
  std::istringstream csv(read("maxstable.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line.rfind("# config: ", 0), 0u);
  std::getline(csv, line);
  EXPECT_EQ(line, "# seed: 3");
  std::getline(csv, line);
  EXPECT_EQ(line, "replicate,t_1,x_1,truncation_diag");
  int rows = 0;
  while (std::getline(csv, line)) ++rows;
  EXPECT_EQ(rows, 60);
  EXPECT_TRUE(fs::exists(dir_ / "simulate-maxstable.json"));
}

TEST_F(Cli, TransformValidates) {
  const auto cfg = write_config(
      "variogram: {theta: 4}\nmc: {n: 2000}\ntransform: {variant: zn_prime_finiteS, n_paths: 10, pilot_n: 500}\n");
  ASSERT_EQ(run({"transform", "-c", cfg, "-o", dir_.string()}), exit_ok) << err_.str();
  const auto r = report("transform.json");
  EXPECT_EQ(r["result"]["validation"]["verdict"], "pass");
  EXPECT_TRUE(r["diagnostics"]["finite_s"]["pass"].get<bool>());
  EXPECT_NE(read("transform.csv").find("replicate,t_1,x_1,weight,snap_error"), std::string::npos);
}

TEST_F(Cli, ValidateBrownResnick) {
  const auto cfg = write_config("mc: {n: 2000}\n");
  EXPECT_EQ(run({"validate", "-c", cfg, "-o", dir_.string()}), exit_ok) << err_.str();
  EXPECT_EQ(report("validate.json")["result"]["verdict"], "pass");
}

TEST_F(Cli, RerunFromEchoedConfigIsBitwiseIdentical) {
  const auto cfg = write_config("variogram: {theta: 2}\nmc: {n: 5000, master_seed: 11, workers: 2, chunk: 512}\n");
  ASSERT_EQ(run({"exponent", "-c", cfg, "-o", dir_.string()}), exit_ok);
  const std::string first = read("exponent.json");
  const auto echoed = json::parse(first)["config"];
  const auto p = dir_ / "echo.yaml";
  std::ofstream(p) << echoed.dump();
  ASSERT_EQ(run({"exponent", "-c", p.string(), "-o", dir_.string()}), exit_ok);
  EXPECT_EQ(read("exponent.json"), first);
}
