#include <gtest/gtest.h>

#include <random>

#include "generators.hpp"
#include "hmdp/analysis.hpp"
#include "hmdp/epoch.hpp"

namespace hmdp {
namespace {

using Pairs = std::vector<std::pair<std::size_t, std::size_t>>;

PartialOrder random_order(std::mt19937_64& rng, std::size_t n) {
  // Relations only from lower to higher index keep the relation acyclic.
  Pairs rel;
  std::bernoulli_distribution coin(0.4);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (coin(rng)) rel.emplace_back(i, j);
  return PartialOrder::from_relations(n, rel);
}

bool is_monotone(unsigned g, const PartialOrder& o) {
  for (std::size_t i = 0; i < o.size(); ++i)
    for (std::size_t j = 0; j < o.size(); ++j)
      if (o.leq(i, j) && ((g >> i) & 1u) && !((g >> j) & 1u)) return false;
  return true;
}

TEST(Dominance, UpwardShiftDominates) {
  const auto o = PartialOrder::index_order(2);
  const std::vector<double> p{0.2, 0.8}, q{0.5, 0.5};
  EXPECT_TRUE(stochastically_dominates(p, q, o));
  EXPECT_TRUE(stochastically_dominates(p, p, o));
}

TEST(Dominance, FailureNamesTheTail) {
  const auto o = PartialOrder::index_order(2);
  const std::vector<double> p{0.8, 0.2}, q{0.2, 0.8};
  const auto d = stochastically_dominates(p, q, o);
  EXPECT_EQ(d.verdict, Verdict::fails);
  EXPECT_EQ(d.upper_set, std::vector<std::size_t>{1});
  EXPECT_DOUBLE_EQ(d.mass_p, 0.2);
  EXPECT_DOUBLE_EQ(d.mass_q, 0.8);
}

TEST(Dominance, RejectsBadInput) {
  const auto o = PartialOrder::index_order(2);
  const std::vector<double> p{0.5, 0.6}, q{0.5, 0.5}, r{1.0};
  EXPECT_THROW(stochastically_dominates(p, q, o), std::invalid_argument);
  EXPECT_THROW(stochastically_dominates(r, q, o), std::invalid_argument);
}

TEST(Dominance, CapGivesNotChecked) {
  const auto anti = PartialOrder::from_relations(4, Pairs{});
  const std::vector<double> p{0.25, 0.25, 0.25, 0.25};
  EXPECT_EQ(stochastically_dominates(p, p, anti, 4).verdict, Verdict::not_checked);
}

TEST(Dominance, IncomparableStatesConstrainNothingButSingletonUpperSets) {
  // In an antichain every subset is an upper set, so only p == q dominates.
  const auto anti = PartialOrder::from_relations(2, Pairs{});
  const std::vector<double> p{0.2, 0.8}, q{0.5, 0.5};
  EXPECT_FALSE(stochastically_dominates(p, q, anti));
  EXPECT_TRUE(stochastically_dominates(q, q, anti));
}

TEST(Dominance, IsAPartialOrderOnDistributions) {
  std::mt19937_64 rng(101);
  int transitive_cases = 0;
  for (int trial = 0; trial < 3000; ++trial) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 4)(rng);
    const auto o = random_order(rng, n);
    const auto p = testing::random_distribution(rng, n, 0.3);
    const auto q = testing::random_distribution(rng, n, 0.3);
    const auto r = testing::random_distribution(rng, n, 0.3);
    EXPECT_TRUE(stochastically_dominates(p, p, o));
    if (stochastically_dominates(p, q, o) && stochastically_dominates(q, p, o)) {
      for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(p[i], q[i], 1e-11);
    }
    if (stochastically_dominates(p, q, o) && stochastically_dominates(q, r, o)) {
      ++transitive_cases;
      EXPECT_TRUE(stochastically_dominates(p, r, o));
    }
  }
  EXPECT_GT(transitive_cases, 50);
}

TEST(Dominance, EqualsMonotoneIndicatorTest) {
  std::mt19937_64 rng(103);
  for (int trial = 0; trial < 400; ++trial) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 6)(rng);
    const auto o = trial % 2 == 0 ? PartialOrder::index_order(n) : random_order(rng, n);
    const auto p = testing::random_distribution(rng, n, 0.2);
    // Nudge q towards p so both outcomes occur.
    auto q = testing::random_distribution(rng, n, 0.2);
    if (trial % 3 == 0) q = p;
    bool by_indicators = true;
    for (unsigned g = 0; g < (1u << n); ++g) {
      if (!is_monotone(g, o)) continue;
      double ep = 0.0, eq = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        if ((g >> i) & 1u) {
          ep += p[i];
          eq += q[i];
        }
      if (ep < eq - kDominanceTolerance) by_indicators = false;
    }
    EXPECT_EQ(static_cast<bool>(stochastically_dominates(p, q, o)), by_indicators);
  }
}

TEST(Assumptions, ExampleTwoSatisfiesAll) {
  const System sys(testing::example2());
  const auto rep = check_assumptions(sys);
  for (int k = 1; k <= 5; ++k) EXPECT_EQ(rep[k].verdict, Verdict::holds) << "A" << k;
  EXPECT_TRUE(rep.sufficient());
}

TEST(Assumptions, ExampleOneFailsA4WithTailWitness) {
  const System sys(testing::example1());
  const auto rep = check_assumptions(sys);
  EXPECT_EQ(rep[1].verdict, Verdict::holds);
  EXPECT_EQ(rep[2].verdict, Verdict::holds);
  EXPECT_EQ(rep[3].verdict, Verdict::holds);
  EXPECT_EQ(rep[5].verdict, Verdict::holds);
  ASSERT_EQ(rep[4].verdict, Verdict::fails);
  ASSERT_TRUE(rep[4].witness.has_value());
  const Witness& w = *rep[4].witness;
  EXPECT_EQ(w.allocation, Allocation{{1}});
  EXPECT_EQ(w.lower, 0u);
  EXPECT_EQ(w.dominant, (std::vector<double>{0.8, 0.2}));
  EXPECT_EQ(w.dominated, (std::vector<double>{0.2, 0.8}));
  EXPECT_EQ(w.upper_set, std::vector<std::size_t>{1});
  ASSERT_EQ(w.alternative.size(), 1u);  // action 0 in state 0
  EXPECT_EQ(w.alternative[0].action, 0u);
  EXPECT_FALSE(rep.sufficient());
}

TEST(Assumptions, FlatStructureHoldsByEquality) {
  SystemModel m;
  SubProcessModel sub;
  const auto row = Matrix::from_rows({{0.3, 0.3, 0.4}, {0.3, 0.3, 0.4}, {0.3, 0.3, 0.4}});
  sub.transition = {row, row};
  sub.reward = Matrix::from_rows({{0, 1}, {0, 1}, {0, 1}});
  m.subprocesses = {sub};
  m.K = 2;
  m.B = 1;
  m.budget_mode = BudgetMode::exactly;
  m.T = 2;
  const auto rep = check_assumptions(System(m));
  EXPECT_EQ(rep[3].verdict, Verdict::holds);
  EXPECT_EQ(rep[5].verdict, Verdict::holds);
  EXPECT_EQ(rep[4].verdict, Verdict::holds);
}

TEST(Assumptions, RewardWitnesses) {
  SystemModel m = testing::example2();
  m.subprocesses[0].reward = Matrix::from_rows({{0.0, 0.9}, {0.0, 0.5}});
  m.allow_idle_reward = false;
  const auto rep = check_assumptions(System(m));
  ASSERT_EQ(rep[2].verdict, Verdict::fails);
  const Witness& w = *rep[2].witness;
  EXPECT_EQ(w.kind, Witness::Kind::local_reward);
  EXPECT_EQ(w.lower, 0u);
  EXPECT_EQ(w.upper, 1u);
  EXPECT_DOUBLE_EQ(w.larger, 0.5);
  EXPECT_DOUBLE_EQ(w.smaller, 0.9);
}

TEST(Assumptions, CapsReportNotChecked) {
  const System sys(testing::example1());
  AnalysisCaps tight;
  tight.upper_sets = 1;
  const auto rep = check_assumptions(sys, tight);
  EXPECT_EQ(rep[3].verdict, Verdict::not_checked);
  EXPECT_EQ(rep[4].verdict, Verdict::not_checked);
  EXPECT_EQ(rep[5].verdict, Verdict::not_checked);

  AnalysisCaps few;
  few.policies = 1;
  const auto rep2 = check_assumptions(System(testing::example2()), few);
  EXPECT_EQ(rep2[4].verdict, Verdict::not_checked);
  EXPECT_TRUE(rep2.any_not_checked());
}

TEST(Assumptions, WitnessesReverifyIndependently) {
  std::mt19937_64 rng(107);
  int failures = 0;
  for (int trial = 0; trial < 120; ++trial) {
    const System sys(trial % 2 ? testing::random_model(rng) : testing::monotone_model(rng));
    const auto joint = joint_state_order(sys);
    const auto rep = check_assumptions(sys);
    for (int k = 2; k <= 5; ++k) {
      const auto& a = rep[k];
      if (a.verdict != Verdict::fails) continue;
      ASSERT_TRUE(a.witness.has_value());
      ++failures;
      const Witness& w = *a.witness;
      EXPECT_LT(w.larger, w.smaller);
      if (w.kind == Witness::Kind::dominance) {
        const PartialOrder& o = k == 5 ? sys.state_order(static_cast<std::size_t>(w.subprocess)) : joint;
        std::vector<char> mask(o.size(), 0);
        double mp = 0.0, mq = 0.0;
        for (auto i : w.upper_set) {
          mask[i] = 1;
          mp += w.dominant[i];
          mq += w.dominated[i];
        }
        EXPECT_TRUE(o.is_upper_set(mask));
        EXPECT_LT(mp, mq);
        if (k == 5) {
          const auto& p = sys.sub(static_cast<std::size_t>(w.subprocess)).transition[static_cast<std::size_t>(w.action)];
          EXPECT_TRUE(o.leq(w.lower, w.upper));
          EXPECT_EQ(std::vector<double>(p.row(w.upper).begin(), p.row(w.upper).end()), w.dominant);
        }
        if (k == 4) EXPECT_FALSE(w.alternative.empty());
      }
    }
  }
  EXPECT_GT(failures, 20);
}

TEST(ValueMonotone, Examples) {
  const auto o = PartialOrder::index_order(2);
  EXPECT_TRUE(check_value_monotone(std::vector<double>{89.60, 90.10}, o).holds);
  EXPECT_TRUE(check_value_monotone(std::vector<double>{3.0, 3.0}, o).holds);
  const auto bad = check_value_monotone(std::vector<double>{2.0, 1.0}, o);
  EXPECT_FALSE(bad.holds);
  EXPECT_EQ(bad.witness, std::make_pair(std::size_t{0}, std::size_t{1}));
}

TEST(Compare, ExampleOneIsNotEquivalent) {
  const System sys(testing::example1());
  const auto rep = compare_frameworks(sys);
  EXPECT_FALSE(rep.equivalent);
  EXPECT_NEAR(rep.gap[0], 8.1919, 1e-3);
  EXPECT_NEAR(rep.gap[1], 7.9901, 1e-3);
  EXPECT_TRUE(rep.sandwich_holds);
  ASSERT_EQ(rep.myopic.size(), 2u);
  EXPECT_FALSE(rep.myopic[0].myopic);
  EXPECT_DOUBLE_EQ(rep.myopic[0].copt_epoch_reward, 0.25);
  EXPECT_DOUBLE_EQ(rep.myopic[0].myopic_epoch_reward, 0.5);
  EXPECT_TRUE(rep.myopic[1].myopic);
}

TEST(Compare, ExampleTwoIsEquivalent) {
  const System sys(testing::example2());
  const auto rep = compare_frameworks(sys);
  EXPECT_TRUE(rep.equivalent);
  EXPECT_LE(rep.sup_gap, 10 * 1e-8);
  EXPECT_TRUE(rep.all_myopic());
}

TEST(Compare, SandwichOnRandomInstances) {
  std::mt19937_64 rng(109);
  for (int trial = 0; trial < 60; ++trial) {
    const System sys(testing::random_model(rng));
    const auto rep = compare_frameworks(sys);
    EXPECT_TRUE(rep.sandwich_holds) << rep.sandwich_violation;
    // Equivalence exactly when COpt's locals are T-myopic everywhere.
    if (rep.all_myopic()) EXPECT_LE(rep.sup_gap, 1e-6);
  }
}

TEST(Structure, SufficientConditionsGiveEquivalenceAndMonotoneValue) {
  std::mt19937_64 rng(113);
  int verified = 0;
  for (int trial = 0; trial < 400 && verified < 25; ++trial) {
    const System sys(testing::monotone_model(rng));
    if (!check_assumptions(sys).sufficient()) continue;
    ++verified;
    const auto rep = compare_frameworks(sys);
    EXPECT_TRUE(rep.equivalent) << rep.sup_gap;
    EXPECT_TRUE(check_value_monotone(rep.copt.value, joint_state_order(sys)).holds);
  }
  EXPECT_GE(verified, 20);
}

TEST(Structure, MonotoneRewardsAndKernelsGiveMonotoneEpochReward) {
  std::mt19937_64 rng(127);
  int verified = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const System sys(testing::monotone_model(rng));
    const auto rep = check_assumptions(sys);
    if (rep[1].verdict != Verdict::holds || rep[2].verdict != Verdict::holds || rep[5].verdict != Verdict::holds)
      continue;
    ++verified;
    EXPECT_FALSE(find_epoch_reward_violation(sys).has_value());
  }
  EXPECT_GE(verified, 50);
}

TEST(Structure, EpochRewardViolationFound) {
  SystemModel m = testing::example2();
  m.subprocesses[0].reward = Matrix::from_rows({{0.0, 0.9}, {0.0, 0.5}});
  m.allow_idle_reward = false;
  const auto v = find_epoch_reward_violation(System(m));
  ASSERT_TRUE(v.has_value());
  EXPECT_EQ(v->first, std::make_pair(std::size_t{0}, std::size_t{1}));
}

}  // namespace
}  // namespace hmdp
