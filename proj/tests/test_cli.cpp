#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fogna/config.hpp"

namespace fs = std::filesystem;
using fogna::Config;
using fogna::ConfigError;

namespace {

struct CliRun {
  int code = -1;
  std::string out, err;
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("fogna_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  CliRun cli(const std::string& args, const std::string& env = "") const {
    const auto o = dir_ / "stdout.txt", e = dir_ / "stderr.txt";
    const std::string cmd = "cd '" + dir_.string() + "' && " + (env.empty() ? "" : env + " ") + "'" FOGNA_CLI_PATH "' " +
                            args + " >'" + o.string() + "' 2>'" + e.string() + "'";
    const int raw = std::system(cmd.c_str());
    CliRun r;
    r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = slurp(o);
    r.err = slurp(e);
    return r;
  }

  fs::path write(const std::string& name, const std::string& text) const {
    const auto p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }

  fs::path dir_;
};

}  // namespace

TEST(Config, ParsesCommentsAndWhitespace) {
  std::istringstream is("# header\n  N = 11  \n\nangles=-10, 5 ,20 # trailing\nK=1.4e4\non = yes\n");
  Config c;
  c.parse(is, "x.cfg");
  EXPECT_EQ(c.get_int("N"), 11);
  EXPECT_EQ(c.get_doubles("angles"), (std::vector<double>{-10, 5, 20}));
  EXPECT_EQ(c.get_int("K"), 14000);
  EXPECT_TRUE(c.get_bool("on", false));
  EXPECT_EQ(c.entry("angles").origin, "x.cfg:4");
  EXPECT_EQ(c.get_int("missing", 3), 3);
}

TEST(Config, ErrorsNameTheLine) {
  auto message = [](const std::string& text) {
    std::istringstream is(text);
    Config c;
    try {
      c.parse(is, "run.cfg");
      c.check_known({"N", "seed"});
      c.get_int("N");
      if (c.has("seed")) c.get_seed("seed");
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  EXPECT_EQ(message("N = 5\nbogus line\n"), "run.cfg:2: expected key = value");
  EXPECT_EQ(message("\n\nN = five\n"), "run.cfg:3: 'N' expects an integer, got 'five'");
  EXPECT_EQ(message("N = 5\nsnr = 3\n"), "run.cfg:2: unknown key 'snr'");
  EXPECT_EQ(message("N = 5\nseed = -1\n"), "run.cfg:2: 'seed' must be a non-negative integer, got '-1'");
  EXPECT_EQ(message("N = 1.5\n"), "run.cfg:1: 'N' expects an integer, got '1.5'");
  EXPECT_EQ(message("a-b = 1\n"), "run.cfg:1: invalid key 'a-b'");
  EXPECT_EQ(message("seed = 1\n"), "missing required key 'N'");
}

TEST(Config, ListAndOverride) {
  std::istringstream is("snr = 1,,2\n");
  Config c;
  c.parse(is, "f");
  EXPECT_THROW(c.get_doubles("snr"), ConfigError);
  c.set("snr", " 4 ", "--snr");
  EXPECT_EQ(c.get_doubles("snr"), (std::vector<double>{4}));
  EXPECT_EQ(c.entry("snr").origin, "--snr");
}

TEST_F(CliTest, DesignElevenSensors) {
  const auto r = cli("--out o design 11");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("split (N1,N2,N3) = (5,3,3)"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("DOF = 715"), std::string::npos);
  EXPECT_NE(r.out.find("positions = {0,1,3,5,6,25,38,51,102,204,306}"), std::string::npos);
  const auto trace = slurp(dir_ / "o" / "design_N11_trace.csv");
  EXPECT_EQ(trace.substr(0, trace.find('\n')), "N1,N2,N3,M1,M2,E1,E2,DOF");
}

TEST_F(CliTest, InvalidSensorCountExitsTwo) {
  const auto r = cli("design 3");
  EXPECT_EQ(r.code, 2);
  EXPECT_FALSE(r.err.empty());
  EXPECT_EQ(cli("frobnicate").code, 2);
}

TEST_F(CliTest, ConfigFileErrorIsLinePrecise) {
  const auto cfg = write("bad.cfg", "# design\nN = 11\nN2 = 4\n");
  const auto r = cli("design --config " + cfg.string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("bad.cfg:3: unknown key 'N2'"), std::string::npos) << r.err;
}

TEST_F(CliTest, FlagsOverrideConfigFile) {
  const auto cfg = write("d.cfg", "N = 9\n");
  const auto r = cli("--out o design --config " + cfg.string() + " --N 11");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("N = 11"), std::string::npos);
}

TEST_F(CliTest, EnvironmentSetsOutputDirectory) {
  const auto r = cli("design 9", std::string("FOGNA_OUT_DIR='") + (dir_ / "envout").string() + "'");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir_ / "envout" / "design_N9_trace.csv"));
  // an explicit flag wins over the environment
  const auto f = cli("--out flagout design 9", std::string("FOGNA_OUT_DIR='") + (dir_ / "envout2").string() + "'");
  ASSERT_EQ(f.code, 0);
  EXPECT_TRUE(fs::exists(dir_ / "flagout" / "design_N9_trace.csv"));
  EXPECT_FALSE(fs::exists(dir_ / "envout2"));
}

TEST_F(CliTest, CoarrayReport) {
  const auto r = cli("--out o coarray --positions 0,1,5,8 --kind dca");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j, nlohmann::json::parse(slurp(dir_ / "o" / "coarray.json")));
  EXPECT_NE(r.out.find("\"DCA\""), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("central_consecutive"), std::string::npos);
  const auto bad = cli("coarray --positions 0,1,5,8 --kind nope");
  EXPECT_EQ(bad.code, 2);
}

TEST_F(CliTest, StochasticCommandsNeedSeed) {
  const auto r = cli("resolve --split 4,2,1 --angles=-0.8,0.8 --snapshots 500 --trials 2");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("seed"), std::string::npos) << r.err;
}

TEST_F(CliTest, ResolveIsDeterministicAcrossJobs) {
  const std::string args = " resolve --split 4,2,1 --angles=-5,5 --snapshots 800 --trials 4 --seed 3";
  const auto a = cli("--out a --jobs 1" + args);
  const auto b = cli("--out b --jobs 3" + args);
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(b.code, 0) << b.err;
  for (const char* f : {"resolve.csv", "resolve_trials.jsonl"}) {
    const auto x = slurp(dir_ / "a" / f);
    EXPECT_FALSE(x.empty());
    EXPECT_EQ(x, slurp(dir_ / "b" / f)) << f;
  }
  std::ifstream jl(dir_ / "a" / "resolve_trials.jsonl");
  std::string line;
  int n = 0;
  while (std::getline(jl, line)) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_TRUE(j.contains("seed"));
    ++n;
  }
  EXPECT_EQ(n, 4);
}

TEST_F(CliTest, RmseCsvHeaderAndRerun) {
  const std::string args = "rmse --split 4,2,1 --angles=-20,10 --snr_db=-3,3 --snapshots 600 --trials 3 --seed 8";
  ASSERT_EQ(cli("--out a " + args).code, 0);
  ASSERT_EQ(cli("--out b " + args).code, 0);
  const auto csv = slurp(dir_ / "a" / "rmse.csv");
  EXPECT_EQ(csv, slurp(dir_ / "b" / "rmse.csv"));
  std::istringstream is(csv);
  std::string header, row;
  std::getline(is, header);
  EXPECT_NE(header.find("median_rmse"), std::string::npos) << header;
  int rows = 0;
  while (std::getline(is, row)) ++rows;
  EXPECT_EQ(rows, 2);
}

TEST_F(CliTest, TablesWriteCsv) {
  ASSERT_EQ(cli("--out o dof-table 9,11").code, 0);
  const auto dof = slurp(dir_ / "o" / "dof_table.csv");
  EXPECT_EQ(dof.substr(0, dof.find('\n')), "family,N,split,formula_dof,published_dof,measured_dof,note");
  ASSERT_EQ(cli("--out o coupling-table 11").code, 0);
  EXPECT_FALSE(slurp(dir_ / "o" / "coupling_table.csv").empty());
}
