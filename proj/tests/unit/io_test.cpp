#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "generators.hpp"
#include "hmdp/io.hpp"
#include "json.hpp"

namespace hmdp {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const fs::path kInstances{HMDP_INSTANCE_DIR};

std::string error_of(const std::string& text) {
  try {
    io::parse_instance(text);
  } catch (const io::ParseError& e) {
    return e.what();
  }
  return {};
}

json example_doc() { return json::parse(io::serialize_instance(testing::example1())); }

TEST(ParseInstance, BundledInstancesLoad) {
  EXPECT_EQ(io::load_instance(kInstances / "example1.json"), testing::example1());
  EXPECT_EQ(io::load_instance(kInstances / "example2.json"), testing::example2());
  const auto zero = io::load_instance(kInstances / "zero_reward.json");
  EXPECT_NO_THROW(System{zero});
  EXPECT_EQ(zero.budget_mode, BudgetMode::at_most);
}

TEST(ParseInstance, RoundTripIsIdentity) {
  std::mt19937_64 rng(137);
  for (int trial = 0; trial < 100; ++trial) {
    SystemModel m = testing::random_model(rng);
    if (trial % 3 == 0) {
      m.state_order.clear();
      for (const auto& sub : m.subprocesses) {
        const std::size_t n = sub.n_states();
        std::vector<std::pair<std::size_t, std::size_t>> rel;
        for (std::size_t i = 0; i + 1 < n; i += 2) rel.emplace_back(i, i + 1);
        m.state_order.push_back(PartialOrder::from_relations(n, rel));
      }
    }
    const auto text = io::serialize_instance(m);
    const auto back = io::parse_instance(text);
    EXPECT_EQ(back, m) << text;
    EXPECT_EQ(io::serialize_instance(back), text);
  }
}

TEST(ParseInstance, LiteralZeroGlobalReward) {
  auto doc = example_doc();
  doc["global_reward"] = 0;
  EXPECT_TRUE(io::parse_instance(doc.dump()).global_reward.empty());
  doc["global_reward"] = 1;
  EXPECT_NE(error_of(doc.dump()).find("/global_reward"), std::string::npos);
}

TEST(ParseInstance, StateOrderPairs) {
  auto doc = example_doc();
  doc["state_order"] = json::array({json::array({json::array({1, 0})})});
  const auto m = io::parse_instance(doc.dump());
  ASSERT_EQ(m.state_order.size(), 1u);
  EXPECT_TRUE(m.state_order[0].leq(1, 0));
  EXPECT_FALSE(m.state_order[0].leq(0, 1));
  doc["state_order"] = json::array({json::array({json::array({0, 5})})});
  EXPECT_NE(error_of(doc.dump()).find("/state_order/0"), std::string::npos);
  doc["state_order"] = "reverse";
  EXPECT_NE(error_of(doc.dump()).find("/state_order"), std::string::npos);
}

TEST(ParseInstance, SyntaxErrorsReportLineAndColumn) {
  const std::string msg = error_of("{\n  \"K\": 2,\n  \"B\": ]\n}");
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
  EXPECT_NE(msg.find("column 8"), std::string::npos) << msg;
}

TEST(ParseInstance, FieldErrorsNameTheField) {
  auto doc = example_doc();
  doc["subprocesses"][0]["reward"] = "high";
  EXPECT_NE(error_of(doc.dump()).find("/subprocesses/0/reward"), std::string::npos);

  doc = example_doc();
  doc["subprocesses"][0]["transition"][1][0] = json::array({0.5, "x"});
  EXPECT_NE(error_of(doc.dump()).find("/subprocesses/0/transition/1"), std::string::npos);

  doc = example_doc();
  doc.erase("beta");
  EXPECT_NE(error_of(doc.dump()).find("/beta"), std::string::npos);

  doc = example_doc();
  doc["budget_mode"] = "sometimes";
  EXPECT_NE(error_of(doc.dump()).find("/budget_mode"), std::string::npos);

  doc = example_doc();
  doc["K"] = 1.5;
  EXPECT_NE(error_of(doc.dump()).find("/K"), std::string::npos);

  EXPECT_THROW(io::load_instance(kInstances / "missing.json"), io::ParseError);
}

TEST(ParseInstance, SemanticErrorsComeFromTheModel) {
  auto doc = example_doc();
  doc["subprocesses"][0]["transition"][0][0] = json::array({0.5, 0.6});
  const auto m = io::parse_instance(doc.dump());
  EXPECT_THROW(System{m}, std::invalid_argument);
}

TEST(Output, ValueCsvColumns) {
  const System sys(testing::example1());
  const auto r = value_iteration(sys, Framework::copt);
  std::istringstream in(io::value_csv(sys, r));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "state_index,components,value");
  std::getline(in, line);
  EXPECT_EQ(line.rfind("0,0,74.58", 0), 0u) << line;
  std::getline(in, line);
  EXPECT_EQ(line.rfind("1,1,75.20", 0), 0u) << line;
}

TEST(Output, ComparisonCsvColumns) {
  const System sys(testing::example1());
  const auto rep = compare_frameworks(sys);
  std::istringstream in(io::comparison_csv(sys, rep));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "state_index,components,V_copt,V_fopt,lower_envelope,gap");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 2);
}

TEST(Output, SolveJsonShapeAndDeterminism) {
  const System sys(testing::example2());
  const io::RunMetadata meta{1e-8, 100000, 7};
  const auto a = io::solve_result_json(sys, value_iteration(sys, Framework::fopt), meta);
  const auto b = io::solve_result_json(sys, value_iteration(sys, Framework::fopt), meta);
  EXPECT_EQ(a, b);
  const auto doc = json::parse(a);
  EXPECT_EQ(doc["framework"], "fopt");
  EXPECT_NEAR(doc["value"][0].get<double>(), 89.6, 1e-6);
  EXPECT_TRUE(doc["converged"].get<bool>());
  EXPECT_EQ(doc["metadata"]["seed"], 7);
  EXPECT_EQ(doc["global_policy"].size(), 2u);
  EXPECT_EQ(doc["local_policies"][0]["kind"], "per-subprocess");

  const auto c = json::parse(io::solve_result_json(sys, value_iteration(sys, Framework::copt), meta));
  EXPECT_EQ(c["local_policies"][0]["kind"], "joint");
}

TEST(Output, AssumptionJsonCarriesWitness) {
  const System sys(testing::example1());
  const auto doc = json::parse(io::assumption_report_json(sys, check_assumptions(sys)));
  std::ostringstream all;
  all << doc;
  EXPECT_NE(all.str().find("upper_set"), std::string::npos);
  EXPECT_NE(all.str().find("fails"), std::string::npos);
}

TEST(Output, WriteFileCreatesDirectories) {
  const auto dir = fs::temp_directory_path() / "hmdp_io_test" / "nested";
  fs::remove_all(dir.parent_path());
  io::write_file(dir / "x.txt", "hello");
  std::ifstream in(dir / "x.txt");
  std::string s;
  in >> s;
  EXPECT_EQ(s, "hello");
  fs::remove_all(dir.parent_path());
}

}  // namespace
}  // namespace hmdp
