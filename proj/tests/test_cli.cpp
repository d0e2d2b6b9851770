#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "affvortex/cli.hpp"

namespace fs = std::filesystem;
using affvortex::io::json;

namespace {

const fs::path kSamples = AFFVORTEX_SAMPLES_DIR;

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  args.insert(args.begin(), "affvortex");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = affvortex::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json load(const fs::path& p) { return json::parse(slurp(p)); }

std::string sample(const char* name) { return (kSamples / name).string(); }

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("affvortex_cli_") + info->name());
    fs::remove_all(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string out(const std::string& sub = "") const { return (sub.empty() ? dir_ : dir_ / sub).string(); }
  fs::path dir_;
};

std::vector<std::string> coarse() { return {"--n-r", "64", "--n-theta", "32"}; }

std::vector<std::string> with(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

TEST_F(CliTest, SolveTrivialPair) {
  const CliRun r = run({"--out", out(), "solve", sample("pair_trivial.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const json obs = load(dir_ / "observables.json");
  EXPECT_EQ(obs["d"], 0);
  EXPECT_LT(std::abs(obs["energy"].get<double>()), 1e-6);
  EXPECT_TRUE(fs::exists(dir_ / "h.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "run_meta.json"));
}

TEST_F(CliTest, SolveDegreeOneEnergy) {
  const CliRun r = run({"--out", out(), "solve", sample("pair_z.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const json obs = load(dir_ / "observables.json");
  EXPECT_EQ(obs["d"], 1);
  EXPECT_NEAR(obs["energy"].get<double>(), 2 * std::numbers::pi, 0.01 * 2 * std::numbers::pi);
  const std::string csv = slurp(dir_ / "h.csv");
  EXPECT_EQ(csv.rfind("r,theta,value\n", 0), 0u);
}

TEST_F(CliTest, MalformedPairNamesTheField) {
  const CliRun r = run({"--out", out(), "solve", sample("malformed_pair.json")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("polys[1][0][1]"), std::string::npos) << r.err;
  const json e = load(dir_ / "error.json");
  EXPECT_EQ(e["error"]["code"], "ParseError");
  EXPECT_EQ(e["exit_code"], 2);
  EXPECT_FALSE(fs::exists(dir_ / "observables.json"));
  EXPECT_FALSE(fs::exists(dir_ / "h.csv"));
}

TEST_F(CliTest, SolverFailureLeavesNoArtifacts) {
  const CliRun r = run(with({"--out", out(), "--radius", "8"}, {"solve", sample("pair_boundary_root.json")}));
  EXPECT_EQ(r.code, 3) << r.err;
  EXPECT_FALSE(fs::exists(dir_ / "observables.json"));
  EXPECT_FALSE(fs::exists(dir_ / "h.csv"));
  for (const auto& entry : fs::directory_iterator(dir_)) EXPECT_NE(entry.path().extension(), ".tmp");
}

TEST_F(CliTest, MissingFileAndUnknownCommand) {
  EXPECT_EQ(run({"solve", "/nonexistent/pair.json"}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"--n-r", "-3", "solve", sample("pair_z.json")}).code, 2);
}

TEST_F(CliTest, OracleProfiles) {
  ASSERT_EQ(run({"--out", out("d0"), "oracle", "0"}).code, 0);
  std::istringstream csv(slurp(dir_ / "d0" / "profile.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "r,h,dh_dr");
  int rows = 0;
  while (std::getline(csv, line)) {
    const auto c1 = line.find(','), c2 = line.find(',', c1 + 1);
    EXPECT_EQ(std::stod(line.substr(c1 + 1, c2 - c1 - 1)), 0.0);
    ++rows;
  }
  EXPECT_GT(rows, 100);

  // d = 1: h(r) - log r decays towards the boundary, where it vanishes.
  ASSERT_EQ(run({"--out", out("d1"), "--radius", "16", "oracle", "1"}).code, 0);
  std::istringstream rows1(slurp(dir_ / "d1" / "profile.csv"));
  std::getline(rows1, line);
  std::vector<std::pair<double, double>> gaps;
  while (std::getline(rows1, line)) {
    const auto c1 = line.find(','), c2 = line.find(',', c1 + 1);
    const double r = std::stod(line.substr(0, c1));
    if (r > 0) gaps.emplace_back(r, std::abs(std::stod(line.substr(c1 + 1, c2 - c1 - 1)) - std::log(r)));
  }
  ASSERT_GT(gaps.size(), 100u);
  double previous = INFINITY;
  for (double target : {2.0, 4.0, 8.0, 12.0}) {
    const auto it = std::lower_bound(gaps.begin(), gaps.end(), std::pair{target, 0.0});
    ASSERT_NE(it, gaps.end());
    EXPECT_LT(it->second, previous) << "r = " << it->first;
    previous = it->second;
  }
  EXPECT_LT(previous, 1e-2);
  EXPECT_LT(gaps.back().second, 1e-10);

  EXPECT_EQ(run({"oracle", "-1"}).code, 2);
  EXPECT_EQ(run({"oracle", "31"}).code, 2);
}

TEST_F(CliTest, ClassifyExamples) {
  ASSERT_EQ(run({"--out", out("t1"), "classify", sample("d1_t1.json")}).code, 0);
  EXPECT_EQ(load(dir_ / "t1" / "classification.json")["stratum"], "T1");
  ASSERT_EQ(run({"--out", out("t2"), "classify", sample("d1_t2.json")}).code, 0);
  EXPECT_EQ(load(dir_ / "t2" / "classification.json")["stratum"], "T2");
  ASSERT_EQ(run({"--out", out("s"), "classify", sample("d1_s.json")}).code, 0);
  EXPECT_EQ(load(dir_ / "s" / "classification.json")["stratum"], "S");

  ASSERT_EQ(run({"--out", out("b"), "classify", sample("bubble_family_n2_d1.json")}).code, 0);
  const json b = load(dir_ / "b" / "classification.json");
  EXPECT_EQ(b["verdict"], "Nontrivial");
  EXPECT_FALSE(b["t"].empty());
  EXPECT_FALSE(b["T"].empty());

  ASSERT_EQ(run({"--out", out("c"), "classify", sample("coords_d1_constant_block.json")}).code, 0);
  const json c = load(dir_ / "c" / "classification.json");
  EXPECT_EQ(c["stratum_k"], 0);
  EXPECT_EQ(c["primary"]["d"], 0);
}

TEST_F(CliTest, ClassifyRejectsAllZeroCoords) {
  fs::create_directories(dir_);
  const fs::path zero = dir_ / "zero.json";
  std::ofstream(zero) << R"({"n": 2, "d": 1, "coords": [[0,0],[0,0],[0,0],[0,0]]})";
  EXPECT_EQ(run({"classify", zero.string()}).code, 2);
}

TEST_F(CliTest, KirwanExamples) {
  const auto eval = [](const char* expr, const char* n) {
    const CliRun r = run({"kirwan", expr, "-N", n});
    EXPECT_EQ(r.code, 0) << r.err;
    return r.out;
  };
  EXPECT_EQ(eval("u^3", "3"), "q\n");
  EXPECT_EQ(eval("u", "2"), "c\n");
  EXPECT_EQ(eval("q - u^2", "2"), "0\n");
  EXPECT_EQ(run({"kirwan", "q -", "-N", "2"}).code, 2);
  EXPECT_EQ(run({"kirwan", "u", "-N", "1"}).code, 2);
}

TEST_F(CliTest, SweepConstructionFamily) {
  const CliRun r = run(with(with({"--out", out(), "--jobs", "3"}, coarse()), {"sweep", sample("family_n2_d1.json")}));
  ASSERT_EQ(r.code, 0) << r.err;
  const json s = load(dir_ / "summary.json");
  EXPECT_EQ(s["verdict"], "Nontrivial");
  EXPECT_EQ(s["succeeded"], 4);
  const auto& diffs = s["h_differences"];
  ASSERT_EQ(diffs.size(), 3u);
  for (std::size_t i = 1; i < diffs.size(); ++i) EXPECT_LT(diffs[i].get<double>(), diffs[i - 1].get<double>());
  for (const auto& sample : s["samples"]) EXPECT_NEAR(sample["energy"].get<double>(), 2 * std::numbers::pi, 0.01 * 2 * std::numbers::pi);
  for (int k = 0; k < 4; ++k) EXPECT_TRUE(fs::exists(dir_ / ("sample_" + std::to_string(k) + ".json")));
}

TEST_F(CliTest, SweepConstantFamily) {
  ASSERT_EQ(run(with(with({"--out", out()}, coarse()), {"sweep", sample("family_constant.json")})).code, 0);
  const json s = load(dir_ / "summary.json");
  for (const auto& d : s["h_differences"]) EXPECT_EQ(d.get<double>(), 0.0);
  EXPECT_TRUE(s["bubble"].contains("error"));
}

TEST_F(CliTest, SweepIsolatesFailingMember) {
  ASSERT_EQ(run(with(with({"--out", out()}, coarse()), {"sweep", sample("family_with_bad_member.json")})).code, 0);
  const json s = load(dir_ / "summary.json");
  EXPECT_EQ(s["succeeded"], 3);
  EXPECT_EQ(s["samples"][1]["status"], "failed");
  EXPECT_TRUE(s["samples"][1]["error"].contains("code"));
  for (int k : {0, 2, 3}) EXPECT_EQ(s["samples"][k]["status"], "ok");
  EXPECT_TRUE(s["h_differences"][0].is_null());
  EXPECT_TRUE(s["h_differences"][2].is_number());
}

TEST_F(CliTest, ReportsAreDeterministic) {
  const auto sweep = [&](const std::string& sub, const char* jobs) {
    ASSERT_EQ(run(with(with({"--out", out(sub), "--jobs", jobs}, coarse()), {"sweep", sample("family_n2_d1.json")})).code, 0);
  };
  sweep("a", "1");
  sweep("b", "4");
  EXPECT_EQ(slurp(dir_ / "a" / "summary.json"), slurp(dir_ / "b" / "summary.json"));
  for (int k = 0; k < 4; ++k) {
    const std::string f = "sample_" + std::to_string(k) + ".json";
    EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f));
  }
  ASSERT_EQ(run(with({"--out", out("c")}, {"solve", sample("pair_generic.json")})).code, 0);
  ASSERT_EQ(run(with({"--out", out("d")}, {"solve", sample("pair_generic.json")})).code, 0);
  EXPECT_EQ(slurp(dir_ / "c" / "observables.json"), slurp(dir_ / "d" / "observables.json"));
  EXPECT_EQ(slurp(dir_ / "c" / "h.csv"), slurp(dir_ / "d" / "h.csv"));
}

TEST_F(CliTest, ConfigFileAndFlagPrecedence) {
  ASSERT_EQ(run({"--out", out("cfg"), "--config", sample("config_coarse.json"), "solve", sample("pair_z.json")}).code, 0);
  EXPECT_EQ(load(dir_ / "cfg" / "run_meta.json")["grid"]["n_r"], 64);
  ASSERT_EQ(run({"--out", out("flag"), "--config", sample("config_coarse.json"), "--n-r", "96", "solve", sample("pair_z.json")}).code,
            0);
  EXPECT_EQ(load(dir_ / "flag" / "run_meta.json")["grid"]["n_r"], 96);

  fs::create_directories(dir_);
  const fs::path bad = dir_ / "bad_config.json";
  std::ofstream(bad) << R"({"grid": {"n_rr": 10}})";
  EXPECT_EQ(run({"--config", bad.string(), "solve", sample("pair_z.json")}).code, 2);
}
