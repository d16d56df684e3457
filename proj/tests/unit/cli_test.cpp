#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "generators.hpp"
#include "hmdp/io.hpp"
#include "hmdp_cli/commands.hpp"
#include "json.hpp"

namespace hmdp {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const fs::path kInstances{HMDP_INSTANCE_DIR};

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("hmdp_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    return cli::run(args, out_, err_);
  }
  std::string instance(const std::string& name) const { return (kInstances / name).string(); }
  std::string write_instance(const std::string& name, const SystemModel& m) const {
    const auto p = dir_ / name;
    io::write_file(p, io::serialize_instance(m));
    return p.string();
  }
  std::string slurp(const std::string& name) const {
    std::ifstream in(dir_ / name, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }
  std::vector<double> values(const std::string& csv) const {
    std::istringstream in(slurp(csv));
    std::string line;
    std::getline(in, line);
    std::vector<double> v;
    while (std::getline(in, line)) v.push_back(std::stod(line.substr(line.rfind(',') + 1)));
    return v;
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

SystemModel zero_budget() {
  SystemModel m = testing::example2();
  m.budget_mode = BudgetMode::at_most;
  m.B = 0;
  m.allow_idle_reward = false;
  for (auto& sub : m.subprocesses)
    for (std::size_t s = 0; s < sub.n_states(); ++s) sub.reward(s, 0) = 0.0;
  return m;
}

TEST_F(Cli, SolveCoptExampleOne) {
  ASSERT_EQ(run({"solve", instance("example1.json"), "--framework", "copt", "--out", dir_.string()}), 0)
      << err_.str();
  const auto v = values("example1.copt.values.csv");
  ASSERT_EQ(v.size(), 2u);
  EXPECT_NEAR(v[0], 74.6, 0.05);
  EXPECT_NEAR(v[1], 75.2, 0.05);
  const auto doc = json::parse(slurp("example1.copt.json"));
  EXPECT_TRUE(doc["converged"].get<bool>());
}

TEST_F(Cli, SolveFoptZeroReward) {
  ASSERT_EQ(run({"solve", instance("zero_reward.json"), "--framework", "fopt", "--out", dir_.string()}), 0)
      << err_.str();
  for (double x : values("zero_reward.fopt.values.csv")) EXPECT_EQ(x, 0.0);
}

TEST_F(Cli, SolveBothAgreesOnExampleTwo) {
  ASSERT_EQ(run({"solve", instance("example2.json"), "--framework", "both", "--out", dir_.string()}), 0)
      << err_.str();
  const auto c = values("example2.copt.values.csv");
  const auto f = values("example2.fopt.values.csv");
  ASSERT_EQ(c.size(), f.size());
  for (std::size_t i = 0; i < c.size(); ++i) EXPECT_NEAR(c[i], f[i], 1e-6);
  EXPECT_NEAR(c[0], 89.6, 1e-6);
  EXPECT_NEAR(c[1], 90.1, 1e-6);
}

TEST_F(Cli, SolveWithOracle) {
  EXPECT_EQ(run({"solve", instance("example1.json"), "--framework", "both", "--oracle", "--out", dir_.string()}), 0)
      << err_.str();
}

TEST_F(Cli, SolveFormatSelectsArtifacts) {
  ASSERT_EQ(run({"solve", instance("example1.json"), "--format", "csv", "--out", dir_.string()}), 0);
  EXPECT_TRUE(fs::exists(dir_ / "example1.copt.values.csv"));
  EXPECT_FALSE(fs::exists(dir_ / "example1.copt.json"));
}

TEST_F(Cli, SolveReportsNonConvergence) {
  EXPECT_EQ(run({"solve", instance("example1.json"), "--max-iter", "3", "--out", dir_.string()}), 2);
}

TEST_F(Cli, CompareExitCodes) {
  EXPECT_EQ(run({"compare", instance("example1.json"), "--out", dir_.string()}), 3);
  EXPECT_NE(out_.str().find("8.19"), std::string::npos) << out_.str();
  EXPECT_TRUE(fs::exists(dir_ / "example1.compare.json"));
  EXPECT_TRUE(fs::exists(dir_ / "example1.compare.csv"));
  EXPECT_EQ(run({"compare", instance("example2.json"), "--out", dir_.string()}), 0);
  const auto zb = write_instance("zero_budget.json", zero_budget());
  EXPECT_EQ(run({"compare", zb, "--out", dir_.string()}), 0) << err_.str();
  const auto v = json::parse(slurp("zero_budget.compare.json"));
  EXPECT_TRUE(v["equivalent"].get<bool>());
}

TEST_F(Cli, CheckExitCodes) {
  EXPECT_EQ(run({"check", instance("example2.json"), "--out", dir_.string()}), 0) << out_.str();
  EXPECT_EQ(run({"check", instance("example1.json"), "--out", dir_.string()}), 3);
  EXPECT_NE(out_.str().find("does not dominate"), std::string::npos) << out_.str();
  EXPECT_TRUE(fs::exists(dir_ / "example1.check.json"));

  SystemModel one;
  SubProcessModel sub;
  sub.transition = {Matrix::from_rows({{1.0}}), Matrix::from_rows({{1.0}}), Matrix::from_rows({{1.0}})};
  sub.reward = Matrix::from_rows({{0.0, 1.0, 1.5}});
  one.subprocesses = {sub};
  one.K = 3;
  one.B = 1;
  EXPECT_EQ(run({"check", write_instance("single.json", one), "--out", dir_.string()}), 0) << out_.str();
}

TEST_F(Cli, CheckHonoursCaps) {
  EXPECT_EQ(run({"check", instance("example2.json"), "--upper-set-cap", "1", "--out", dir_.string()}), 4);
  EXPECT_EQ(::setenv("HMDP_POLICY_CAP", "1", 1), 0);
  const int code = run({"check", instance("example2.json"), "--out", dir_.string()});
  ::unsetenv("HMDP_POLICY_CAP");
  EXPECT_EQ(code, 4);
  EXPECT_EQ(::setenv("HMDP_JOINT_CAP", "1", 1), 0);
  const int capped = run({"solve", instance("example2.json"), "--out", dir_.string()});
  ::unsetenv("HMDP_JOINT_CAP");
  EXPECT_EQ(capped, 1);
}

TEST_F(Cli, OracleVerify) {
  EXPECT_EQ(run({"oracle-verify", instance("example1.json"), "--out", dir_.string()}), 0) << out_.str();
  EXPECT_EQ(run({"oracle-verify", instance("example2.json"), "--oracle-pair-cap", "1", "--out", dir_.string()}), 1);
}

TEST_F(Cli, PaperExamples) {
  EXPECT_EQ(run({"paper-examples", "--mc-episodes", "20000", "--out", dir_.string()}), 0) << out_.str();
  EXPECT_NE(out_.str().find("8/8 checks passed"), std::string::npos) << out_.str();

  io::write_file(dir_ / "bad" / "example1.json", "{ not json");
  io::write_file(dir_ / "bad" / "example2.json", "{}");
  EXPECT_EQ(run({"paper-examples", "--data-dir", (dir_ / "bad").string(), "--out", dir_.string()}), 1);
}

TEST_F(Cli, InputErrors) {
  io::write_file(dir_ / "broken.json", "{\n  \"K\": \n");
  EXPECT_EQ(run({"solve", (dir_ / "broken.json").string(), "--out", dir_.string()}), 1);
  EXPECT_NE(err_.str().find("line"), std::string::npos) << err_.str();
  EXPECT_EQ(run({"solve", (dir_ / "absent.json").string()}), 1);
  EXPECT_EQ(run({"solve", instance("example1.json"), "--framework", "neither"}), 1);
  EXPECT_EQ(run({"frobnicate"}), 1);
}

TEST_F(Cli, RepeatRunsAreByteIdentical) {
  const auto a_dir = dir_ / "a", b_dir = dir_ / "b";
  ASSERT_EQ(run({"solve", instance("example1.json"), "--framework", "both", "--out", a_dir.string()}), 0);
  ASSERT_EQ(run({"solve", instance("example1.json"), "--framework", "both", "--out", b_dir.string()}), 0);
  for (const auto* name : {"example1.copt.json", "example1.fopt.json", "example1.copt.values.csv"})
    EXPECT_EQ(slurp(std::string("a/") + name), slurp(std::string("b/") + name)) << name;
}

}  // namespace
}  // namespace hmdp
