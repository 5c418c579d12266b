#include <sys/wait.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "gtest/gtest.h"

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
};

Outcome sh(const std::string& args) {
  const std::string cmd = std::string(FRANSON_CLI) + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  std::string out;
  std::array<char, 4096> buf;
  while (std::size_t n = std::fread(buf.data(), 1, buf.size(), p)) out.append(buf.data(), n);
  const int status = pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("franson_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string at(const std::string& sub) const { return (dir_ / sub).string(); }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, calibrate_prints_power) {
  const auto r = sh("calibrate --nbar 0.01");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "3.2454e-11 W\n");
}

TEST_F(Cli, exit_codes) {
  EXPECT_EQ(sh("").code, 1);
  EXPECT_EQ(sh("nonsense").code, 1);
  EXPECT_EQ(sh("calibrate --set source.nope=1").code, 1);
  EXPECT_EQ(sh("calibrate --set source.q=2").code, 1);
  EXPECT_EQ(sh("--help").code, 0);
  std::ofstream(dir_ / "bad.csv") << "channel,timestamp_ps\nA1,oops\n";
  EXPECT_EQ(sh("correlate --a " + at("bad.csv") + " --b " + at("bad.csv") + " --out " + at("o")).code, 2);
  EXPECT_EQ(sh("correlate --a " + at("bad.csv") + " --b " + at("bad.csv") + " --bin 3furlongs --out " + at("o")).code, 1);
}

TEST_F(Cli, chsh_writes_table) {
  const auto r = sh("chsh --out " + at("c"));
  ASSERT_EQ(r.code, 0);
  const auto j = read_json(dir_ / "c" / "chsh.json");
  EXPECT_NEAR(j["S"].get<double>(), 2 * std::sqrt(2.0), 1e-9);
  EXPECT_EQ(j["E"].size(), 4u);
  EXPECT_TRUE(j.contains("sigma_S"));
  EXPECT_TRUE(fs::exists(dir_ / "c" / "manifest.json"));
}

TEST_F(Cli, fixed_seed_reproduces_tags) {
  const std::string common = " --set montecarlo.duration_s=1e-4 --format csv --phi-a 0.3 ";
  ASSERT_EQ(sh("tags --seed 5" + common + "--out " + at("a")).code, 0);
  ASSERT_EQ(sh("tags --seed 5" + common + "--out " + at("b")).code, 0);
  ASSERT_EQ(sh("tags --seed 6" + common + "--out " + at("c")).code, 0);
  EXPECT_EQ(slurp(dir_ / "a" / "tags_A1.csv"), slurp(dir_ / "b" / "tags_A1.csv"));
  EXPECT_NE(slurp(dir_ / "a" / "tags_A1.csv"), slurp(dir_ / "c" / "tags_A1.csv"));
}

TEST_F(Cli, correlate_writes_histogram) {
  ASSERT_EQ(sh("tags --set montecarlo.duration_s=1e-3 --set source.q=0.3 --out " + at("t")).code, 0);
  const auto r = sh("correlate --a " + at("t/tags_A1.qtt") + " --b " + at("t/tags_B1.qtt") +
                    " --bin 1070ps --max-lag 4.28ns --out " + at("h"));
  ASSERT_EQ(r.code, 0);
  const std::string csv = slurp(dir_ / "h" / "histogram.csv");
  EXPECT_EQ(csv.rfind("lag_ps,count\n-4280,", 0), 0u);
  EXPECT_TRUE(fs::exists(dir_ / "h" / "g2.json"));
}

TEST_F(Cli, tags_correlate_chsh_round_trip) {
  const std::string cfg = " --set montecarlo.duration_s=1.07e-2 --seed 11 ";
  ASSERT_EQ(sh("tags --chsh" + cfg + "--out " + at("tags")).code, 0);
  ASSERT_EQ(sh("correlate --chsh-dir " + at("tags") + cfg + "--out " + at("corr")).code, 0);
  ASSERT_EQ(sh("chsh --counts " + at("corr/counts.json") + " --out " + at("mc")).code, 0);
  ASSERT_EQ(sh("chsh --analytic" + cfg + "--out " + at("exact")).code, 0);
  const auto mc = read_json(dir_ / "mc" / "chsh.json");
  const auto exact = read_json(dir_ / "exact" / "chsh.json");
  const double s = mc["S"].get<double>(), sigma = mc["sigma_S"].get<double>();
  EXPECT_LT(std::abs(s - exact["S"].get<double>()), 3 * sigma) << s << " +- " << sigma;
}
