#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <variant>
#include <vector>

#include "hmdp/indexing.hpp"
#include "hmdp/model.hpp"

namespace hmdp {

/// Dense value vector indexed by joint state.
using ValueFunction = std::vector<double>;

/// Budget-augmented deterministic policy of one subprocess for one epoch.
///
/// action(t, s, b) is defined for every remaining budget b in 0..budget and
/// never exceeds b, so every trajectory spends at most the granted budget.
class LocalPolicy {
 public:
  LocalPolicy() = default;
  LocalPolicy(int horizon, std::size_t n_states, int budget);

  int horizon() const { return horizon_; }
  std::size_t n_states() const { return n_states_; }
  int budget() const { return budget_; }

  int action(int t, std::size_t s, int remaining) const { return table_[index(t, s, remaining)]; }
  /// Throws std::invalid_argument when a > remaining.
  void set_action(int t, std::size_t s, int remaining, int a);

  bool operator==(const LocalPolicy&) const = default;

 private:
  std::size_t index(int t, std::size_t s, int b) const {
    return (static_cast<std::size_t>(t) * n_states_ + s) * static_cast<std::size_t>(budget_ + 1) +
           static_cast<std::size_t>(b);
  }

  int horizon_ = 0;
  std::size_t n_states_ = 0;
  int budget_ = 0;
  std::vector<int> table_;
};

/// Epoch policy over the joint augmented state (joint local state, remaining
/// budget vector). Budget vectors are coded row-major with radices grant[i]+1.
class JointLocalPolicy {
 public:
  JointLocalPolicy() = default;
  JointLocalPolicy(int horizon, MixedRadix states, Allocation grant);

  int horizon() const { return horizon_; }
  const Allocation& grant() const { return grant_; }
  const MixedRadix& states() const { return states_; }
  const MixedRadix& budgets() const { return budgets_; }

  std::span<const int> action(int t, std::size_t joint_state, std::size_t budget_code) const {
    return {table_.data() + offset(t, joint_state, budget_code), grant_.size()};
  }
  /// Throws std::invalid_argument when any component exceeds its remaining budget.
  void set_action(int t, std::size_t joint_state, std::size_t budget_code, std::span<const int> a);

  bool operator==(const JointLocalPolicy&) const = default;

 private:
  std::size_t offset(int t, std::size_t s, std::size_t b) const {
    return ((static_cast<std::size_t>(t) * states_.size() + s) * budgets_.size() + b) * grant_.size();
  }

  int horizon_ = 0;
  MixedRadix states_;
  Allocation grant_;
  MixedRadix budgets_;
  std::vector<int> table_;
};

/// Local behaviour for one allocation: per-subprocess policies (FOpt) or a
/// joint augmented policy (COpt).
using LocalPlan = std::variant<std::vector<LocalPolicy>, JointLocalPolicy>;
using LocalPlanMap = std::map<Allocation, LocalPlan>;

/// Stationary allocation map phi: joint state index -> allocation.
struct GlobalPolicy {
  std::vector<Allocation> allocation;

  const Allocation& operator()(std::size_t joint_state) const { return allocation[joint_state]; }
  bool operator==(const GlobalPolicy&) const = default;
};

/// Expresses per-subprocess policies as a joint augmented policy.
JointLocalPolicy lift(const System& system, const Allocation& grant, std::span<const LocalPolicy> locals);
JointLocalPolicy lift(const System& system, const Allocation& grant, const LocalPlan& plan);
inline JointLocalPolicy lift(const System& system, const Allocation& grant, const std::vector<LocalPolicy>& locals) {
  return lift(system, grant, std::span<const LocalPolicy>(locals));
}

}  // namespace hmdp
