#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "hmdp/indexing.hpp"
#include "hmdp/model.hpp"

namespace hmdp {

/// Budget-augmented fast-timescale chain over a group of independent
/// subprocesses sharing one epoch.
class AugmentedChain {
 public:
  AugmentedChain(std::vector<const SubProcessModel*> subs, std::vector<int> grant, int horizon);

  std::size_t n_members() const { return subs_.size(); }
  const SubProcessModel& member(std::size_t i) const { return *subs_[i]; }
  int horizon() const { return horizon_; }
  const MixedRadix& states() const { return states_; }
  const MixedRadix& budgets() const { return budgets_; }
  std::size_t full_budget() const { return budgets_.size() - 1; }

  /// Joint actions affordable at `budget_code`, lexicographic.
  const std::vector<std::vector<int>>& feasible_actions(std::size_t budget_code) const {
    return actions_[budget_code];
  }
  std::size_t spend(std::size_t budget_code, std::span<const int> action) const;
  double reward(std::size_t state, std::span<const int> action) const;
  double transition(std::size_t from, std::span<const int> action, std::size_t to) const;

  /// Calls f(next, p) for every joint successor with p > 0, in index order.
  void for_each_successor(std::size_t state, std::span<const int> action,
                          const std::function<void(std::size_t, double)>& f) const;

 private:
  std::vector<const SubProcessModel*> subs_;
  std::vector<int> grant_;
  int horizon_;
  MixedRadix states_;
  MixedRadix budgets_;
  std::vector<std::vector<std::vector<int>>> actions_;
};

struct AugmentedNode {
  int t = 0;
  std::size_t state = 0;
  std::size_t budget = 0;
  auto operator<=>(const AugmentedNode&) const = default;
};

/// One node's decision, as an index into chain.feasible_actions(node.budget).
struct NodeDecision {
  AugmentedNode node;
  std::size_t action = 0;
};

/// Decisions at every node reachable with positive probability, ordered by
/// (t, state, budget).
using ReachablePolicy = std::vector<NodeDecision>;

struct EnumerationStats {
  std::size_t visited = 0;
  bool truncated = false;  // more policies exist than the cap allowed
};

/// Enumerates every deterministic Markov policy on the nodes reachable from
/// `start`, in lexicographic order of decisions (earliest node most significant).
/// `visit` returning false stops the enumeration early.
EnumerationStats for_each_reachable_policy(const AugmentedChain& chain, AugmentedNode start, std::size_t cap,
                                           const std::function<bool(const ReachablePolicy&)>& visit);

/// Looks up the decision for `node`, or nullptr.
const NodeDecision* find_decision(const ReachablePolicy& policy, const AugmentedNode& node);

}  // namespace hmdp
