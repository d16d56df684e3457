#include <gtest/gtest.h>

#include <random>

#include "generators.hpp"
#include "hmdp/analysis.hpp"
#include "hmdp/local.hpp"
#include "hmdp/oracle.hpp"

namespace hmdp {
namespace {

SubProcessModel without_idle_reward(SubProcessModel sub) {
  for (std::size_t s = 0; s < sub.n_states(); ++s) sub.reward(s, 0) = 0.0;
  return sub;
}

SubProcessModel random_sub(std::mt19937_64& rng, int max_states, int max_actions) {
  testing::RandomSpec spec;
  spec.max_subprocesses = 1;
  spec.max_states = max_states;
  spec.max_actions = max_actions;
  spec.zero_probability = 0.4;
  return testing::random_model(rng, spec).subprocesses[0];
}

TEST(SolveLocal, ExampleOneSpendsInBothStates) {
  const auto r = solve_local(testing::example1_subprocess(), 1, 1, 0.99);
  EXPECT_EQ(r.policy.action(0, 0, 1), 1);
  EXPECT_EQ(r.policy.action(0, 1, 1), 1);
  EXPECT_DOUBLE_EQ(r.v(0, 0, 1), 0.5);
  EXPECT_DOUBLE_EQ(r.v(0, 1, 1), 1.0);
  EXPECT_EQ(r.epoch_value(), (std::vector<double>{0.5, 1.0}));
}

TEST(SolveLocal, ZeroBudgetEarnsNothing) {
  const auto r = solve_local(without_idle_reward(testing::example1_subprocess()), 0, 3, 0.9);
  for (int t = 0; t <= 3; ++t)
    for (std::size_t s = 0; s < 2; ++s) {
      EXPECT_EQ(r.v(t, s, 0), 0.0);
      if (t < 3) EXPECT_EQ(r.policy.action(t, s, 0), 0);
    }
}

TEST(SolveLocal, ExampleOneTwoStepsMatchesEnumeration) {
  const auto sub = testing::example1_subprocess();
  const auto dp = solve_local(sub, 1, 2, 0.99);
  const auto bf = oracle::brute_force_local(sub, 1, 2, 0.99);
  const auto ag = oracle::compare_local(dp, bf, 1e-10);
  EXPECT_TRUE(ag) << ag.detail;
}

TEST(SolveLocal, QTableAndBellmanConsistency) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 40; ++trial) {
    const auto sub = random_sub(rng, 3, 3);
    const int budget = std::uniform_int_distribution<int>(0, 2)(rng);
    const int T = std::uniform_int_distribution<int>(1, 3)(rng);
    const auto r = solve_local(sub, budget, T, 0.9, true);
    for (int t = 0; t < T; ++t)
      for (std::size_t s = 0; s < sub.n_states(); ++s)
        for (int b = 0; b <= budget; ++b) {
          double best = -1e300;
          for (int a = 0; a <= b && a < static_cast<int>(sub.n_actions()); ++a) best = std::max(best, r.q_value(t, s, b, a));
          EXPECT_NEAR(r.v(t, s, b), best, 1e-12);
          EXPECT_NEAR(r.q_value(t, s, b, r.policy.action(t, s, b)), best, 1e-12);
        }
  }
}

TEST(SolveLocal, MoreBudgetNeverHurts) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 60; ++trial) {
    const auto sub = random_sub(rng, 3, 3);
    const auto r = solve_local(sub, 2, 3, 0.95);
    for (std::size_t s = 0; s < sub.n_states(); ++s) {
      EXPECT_LE(r.v(0, s, 0), r.v(0, s, 1) + 1e-12);
      EXPECT_LE(r.v(0, s, 1), r.v(0, s, 2) + 1e-12);
    }
  }
}

TEST(SolveLocal, MonotoneStructureGivesMonotoneValues) {
  std::mt19937_64 rng(7);
  int checked = 0;
  for (int trial = 0; trial < 200 && checked < 30; ++trial) {
    testing::RandomSpec spec;
    spec.max_subprocesses = 1;
    spec.max_horizon = 3;
    SystemModel m = testing::monotone_model(rng, spec);
    m.T = std::uniform_int_distribution<int>(1, 3)(rng);
    const System sys(m);
    const auto rep = check_assumptions(sys);
    if (rep[2].verdict != Verdict::holds || rep[5].verdict != Verdict::holds) continue;
    ++checked;
    const auto r = solve_local(sys.sub(0), m.K - 1, m.T, m.gamma);
    for (int t = 0; t <= m.T; ++t)
      for (int b = 0; b < m.K; ++b)
        for (std::size_t s = 0; s + 1 < sys.sub(0).n_states(); ++s) EXPECT_LE(r.v(t, s, b), r.v(t, s + 1, b) + 1e-12);
  }
  EXPECT_GE(checked, 30);
}

TEST(SolveLocal, ZeroRewardGivesZeroValueAndIdleActions) {
  SubProcessModel sub = testing::example2_subprocess();
  sub.reward = Matrix(2, 2, 0.0);
  const auto r = solve_local(sub, 1, 3, 0.9);
  for (int t = 0; t < 3; ++t)
    for (std::size_t s = 0; s < 2; ++s)
      for (int b = 0; b <= 1; ++b) {
        EXPECT_EQ(r.v(t, s, b), 0.0);
        EXPECT_EQ(r.policy.action(t, s, b), 0);
      }
}

TEST(SolveLocal, TiesGoToTheSmallestAction) {
  SubProcessModel sub;
  sub.transition = {Matrix::identity(2), Matrix::identity(2), Matrix::identity(2)};
  sub.reward = Matrix::from_rows({{0, 1, 1}, {0, 1, 1}});
  const auto r = solve_local(sub, 2, 1, 0.9);
  EXPECT_EQ(r.policy.action(0, 0, 2), 1);
}

TEST(SolveLocal, MatchesExhaustiveEnumeration) {
  std::mt19937_64 rng(13);
  int checked = 0;
  for (int trial = 0; trial < 120; ++trial) {
    const auto sub = random_sub(rng, 3, 3);
    const int budget = std::uniform_int_distribution<int>(0, 2)(rng);
    const int T = std::uniform_int_distribution<int>(1, 3)(rng);
    const double gamma = std::uniform_real_distribution<double>(0.5, 0.99)(rng);
    oracle::EnumerationBudget caps;
    caps.local_policies = 200'000;
    try {
      const auto bf = oracle::brute_force_local(sub, budget, T, gamma, caps);
      const auto dp = solve_local(sub, budget, T, gamma);
      const auto ag = oracle::compare_local(dp, bf, 1e-10);
      EXPECT_TRUE(ag.values) << ag.detail;
      ++checked;
    } catch (const CapExceeded&) {
    }
  }
  EXPECT_GE(checked, 60);
}

TEST(TMyopic, ExampleTwoSpendsInBothStates) {
  const System sys(testing::example2());
  const auto pi = t_myopic_policy_vector(sys, Allocation{{1}});
  ASSERT_EQ(pi.size(), 1u);
  EXPECT_EQ(pi[0].action(0, 0, 1), 1);
  EXPECT_EQ(pi[0].action(0, 1, 1), 1);
}

TEST(TMyopic, ZeroAllocationIdles) {
  SystemModel m;
  const auto sub = without_idle_reward(testing::example1_subprocess());
  m.subprocesses = {sub, sub};
  m.K = 2;
  m.B = 1;
  m.T = 2;
  const System sys(m);
  const auto pi = t_myopic_policy_vector(sys, Allocation{{0, 0}});
  for (const auto& p : pi)
    for (int t = 0; t < 2; ++t)
      for (std::size_t s = 0; s < 2; ++s) EXPECT_EQ(p.action(t, s, 0), 0);
}

TEST(TMyopic, SeparatesAcrossSubprocesses) {
  SystemModel m;
  const auto sub = without_idle_reward(testing::example1_subprocess());
  m.subprocesses = {sub, sub};
  m.K = 2;
  m.B = 2;
  m.budget_mode = BudgetMode::exactly;
  m.T = 2;
  m.gamma = 0.99;
  const System sys(m);
  const auto pi = t_myopic_policy_vector(sys, Allocation{{1, 1}});
  const auto single = solve_local(sub, 1, 2, 0.99).policy;
  EXPECT_EQ(pi[0], single);
  EXPECT_EQ(pi[1], single);
}

}  // namespace
}  // namespace hmdp
