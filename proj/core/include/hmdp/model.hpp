#pragma once

#include <compare>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "hmdp/indexing.hpp"
#include "hmdp/matrix.hpp"
#include "hmdp/order.hpp"

namespace hmdp {

/// Row sums of transition matrices must be within this distance of 1.
inline constexpr double kStochasticTolerance = 1e-9;

/// Joint state spaces larger than this are rejected as not enumerable.
inline constexpr std::size_t kMaxJointStates = std::size_t{1} << 24;

enum class BudgetMode { at_most, exactly };

/// One local MDP. Action 0 means "no resource spent".
struct SubProcessModel {
  std::vector<Matrix> transition;  // per action, n x n row-stochastic
  Matrix reward;                   // n x m, reward(s, a) >= 0 and reward(s, 0) == 0

  std::size_t n_states() const { return reward.rows(); }
  std::size_t n_actions() const { return reward.cols(); }

  bool operator==(const SubProcessModel&) const = default;
};

/// Raw, unvalidated description of a two-timescale system.
struct SystemModel {
  std::vector<SubProcessModel> subprocesses;
  int K = 2;  // allocation levels {0, ..., K-1}
  int B = 0;  // global per-epoch budget
  BudgetMode budget_mode = BudgetMode::at_most;
  int T = 1;  // fast steps per epoch
  double beta = 0.9;
  double gamma = 0.9;
  // I_g(s, a_g): one row per joint state, one column per allocation code
  // (row-major over {0..K-1}^N). An empty matrix means I_g == 0.
  Matrix global_reward;
  // Per-subprocess state order; empty means the index order everywhere.
  std::vector<PartialOrder> state_order;
  // Accept r_i(s, 0) != 0. Off by default; the bundled worked examples need it.
  bool allow_idle_reward = false;

  bool operator==(const SystemModel&) const = default;
};

struct JointState {
  std::vector<int> components;
  auto operator<=>(const JointState&) const = default;
};

/// Budget granted to each subprocess for one epoch.
struct Allocation {
  std::vector<int> per_subprocess;

  int operator[](std::size_t i) const { return per_subprocess[i]; }
  std::size_t size() const { return per_subprocess.size(); }
  int total() const;
  bool is_zero() const;

  auto operator<=>(const Allocation&) const = default;
};

std::string to_string(const Allocation& a);
std::string to_string(BudgetMode mode);

/// Thrown by validation; carries every violated invariant.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(std::vector<std::string> issues);
  const std::vector<std::string>& issues() const { return issues_; }

 private:
  std::vector<std::string> issues_;
};

/// Every invariant violation of `model`, empty when the model is valid.
std::vector<std::string> validation_issues(const SystemModel& model);

/// A validated, immutable system together with its derived index spaces.
class System {
 public:
  /// Throws ValidationError listing every violation.
  explicit System(SystemModel model);

  const SystemModel& model() const { return model_; }
  std::size_t n_subprocesses() const { return model_.subprocesses.size(); }
  const SubProcessModel& sub(std::size_t i) const { return model_.subprocesses[i]; }
  int horizon() const { return model_.T; }
  double beta() const { return model_.beta; }
  double gamma() const { return model_.gamma; }

  const MixedRadix& states() const { return states_; }
  std::size_t n_joint_states() const { return states_.size(); }
  JointState decode(std::size_t joint_index) const;
  std::size_t encode(const JointState& s) const;

  /// Feasible allocations in lexicographic order.
  const std::vector<Allocation>& allocations() const { return allocations_; }
  std::size_t allocation_code(const Allocation& a) const;
  bool is_feasible(const Allocation& a) const;

  double global_reward(std::size_t joint_index, const Allocation& a) const;
  bool has_global_reward() const { return !model_.global_reward.empty(); }

  const PartialOrder& state_order(std::size_t i) const { return orders_[i]; }
  /// Componentwise product order on joint state indices.
  bool state_leq(std::size_t s, std::size_t t) const;

 private:
  SystemModel model_;
  MixedRadix states_;
  MixedRadix allocation_codes_;
  std::vector<Allocation> allocations_;
  std::vector<PartialOrder> orders_;
};

/// Same as constructing a System; named for symmetry with the CLI.
inline System validate_system(SystemModel model) { return System(std::move(model)); }

}  // namespace hmdp
