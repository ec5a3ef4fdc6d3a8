#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

Result run(const std::string& args) {
  const std::string cmd = std::string(NLFB_CLI_PATH) + " " + args + " 2>&1";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), pipe)) r.out += buf.data();
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

json default_doc() {
  std::ifstream in(std::string(NLFB_SOURCE_DIR) + "/configs/default.json");
  return json::parse(in);
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("nlfb_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const json& doc) {
    const auto p = dir_ / "config.json";
    std::ofstream(p) << doc.dump(2);
    return p.string();
  }

  std::string out() const { return (dir_ / "out").string(); }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, ValidateDefaultPrintsDerivedScalars) {
  const auto r = run("validate --config " + write(default_doc()));
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("R0 = 2\n"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("theta = 1\n"), std::string::npos);
  EXPECT_NE(r.out.find("K1 = 1\n"), std::string::npos);
  EXPECT_NE(r.out.find("l_star = 0.7303259"), std::string::npos);
}

TEST_F(CliTest, ValidateWithoutEquilibrium) {
  auto doc = default_doc();
  doc["growth"]["alpha"] = 1.0;  // R0 = 1
  const auto r = run("validate --config " + write(doc));
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("no positive equilibrium"), std::string::npos) << r.out;
  EXPECT_EQ(r.out.find("l_star"), std::string::npos);
}

TEST_F(CliTest, BadFieldExitsWithValidationCode) {
  auto doc = default_doc();
  doc["params"]["d"] = -1.0;
  const auto r = run("validate --config " + write(doc));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("params.d"), std::string::npos) << r.out;
}

TEST_F(CliTest, FailedCheckExitsWithValidationCode) {
  auto doc = default_doc();
  doc["params"]["c"] = 1000.0;  // G(z_max)/z_max no longer below ab/c
  const auto r = run("validate --config " + write(doc));
  EXPECT_EQ(r.code, 1) << r.out;
  EXPECT_NE(r.out.find("FAIL"), std::string::npos) << r.out;
}

TEST_F(CliTest, MissingConfigFile) {
  const auto r = run("validate --config " + (dir_ / "absent.json").string());
  EXPECT_EQ(r.code, 1);
}

TEST_F(CliTest, UndecidedMuStarProbeExitsThree) {
  auto doc = default_doc();
  doc["params"]["h0"] = 0.18258;
  doc["classify"]["t_max"] = 1.0;
  const auto r = run("mustar --config " + write(doc) + " --out " + out());
  EXPECT_EQ(r.code, 3) << r.out;
}

TEST_F(CliTest, SimulateWritesOutputs) {
  auto doc = default_doc();
  doc["time"]["t_end"] = 2.0;
  doc["time"]["snapshots"] = json::array({0.0, 2.0});
  doc["grid"] = {{"L", 20.0}, {"n", 801}};
  const auto r = run("simulate --config " + write(doc) + " --out " + out());
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_TRUE(fs::exists(fs::path(out()) / "trajectory.csv"));
  EXPECT_TRUE(fs::exists(fs::path(out()) / "snapshot_000.csv"));
  EXPECT_TRUE(fs::exists(fs::path(out()) / "snapshot_001.csv"));
  std::ifstream in(fs::path(out()) / "verdict.json");
  const auto v = json::parse(in);
  EXPECT_TRUE(v.contains("outcome"));
  EXPECT_TRUE(v.contains("evidence"));
  EXPECT_EQ(v["config_hash"].get<std::string>().size(), 64u);
}

TEST_F(CliTest, OdeConvergesToEquilibrium) {
  const auto r = run("ode --config " + write(default_doc()) + " --out " + out());
  EXPECT_EQ(r.code, 0) << r.out;
  std::ifstream in(fs::path(out()) / "ode.csv");
  std::string line, last;
  std::getline(in, line);
  EXPECT_EQ(line, "t,u,v");
  while (std::getline(in, line)) last = line;
  std::stringstream ss(last);
  double t, u, v;
  char c;
  ss >> t >> c >> u >> c >> v;
  EXPECT_NEAR(t, 200.0, 1e-9);
  EXPECT_NEAR(u, 1.0, 1e-6);
  EXPECT_NEAR(v, 1.0, 1e-6);
}

TEST_F(CliTest, LstarWritesJson) {
  const auto r = run("lstar --config " + write(default_doc()) + " --out " + out());
  EXPECT_EQ(r.code, 0) << r.out;
  std::ifstream in(fs::path(out()) / "lstar.json");
  const auto j = json::parse(in);
  EXPECT_NEAR(j["l_star"].get<double>(), 0.7303259542, 1e-8);
}

TEST_F(CliTest, LstarOutsideRegimeIsRuntimeError) {
  auto doc = default_doc();
  doc["growth"]["alpha"] = 0.8;
  const auto r = run("lstar --config " + write(doc) + " --out " + out());
  EXPECT_EQ(r.code, 2) << r.out;
}
