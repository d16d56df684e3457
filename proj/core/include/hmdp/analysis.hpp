#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hmdp/model.hpp"
#include "hmdp/order.hpp"
#include "hmdp/policy.hpp"
#include "hmdp/reachable.hpp"
#include "hmdp/solvers.hpp"

namespace hmdp {

enum class Verdict { holds, fails, not_checked };
std::string to_string(Verdict v);

inline constexpr std::size_t kDefaultUpperSetCap = std::size_t{1} << 20;
inline constexpr std::size_t kDefaultPolicyCap = 100'000;
inline constexpr double kDominanceTolerance = 1e-12;

/// Every upper set of `order` (including the empty and the full set) as
/// sorted member lists, or nullopt when there are more than `cap`.
std::optional<std::vector<std::vector<std::size_t>>> enumerate_upper_sets(const PartialOrder& order,
                                                                          std::size_t cap);

struct DominanceResult {
  Verdict verdict = Verdict::holds;
  std::vector<std::size_t> upper_set;  // violated upper set when verdict == fails
  double mass_p = 0.0;
  double mass_q = 0.0;

  explicit operator bool() const { return verdict == Verdict::holds; }
};

/// p >=_st q: every upper set gets at least as much mass under p as under q.
DominanceResult stochastically_dominates(std::span<const double> p, std::span<const double> q,
                                         const PartialOrder& order, std::size_t cap = kDefaultUpperSetCap);

/// Same test against a precomputed list of upper sets.
DominanceResult stochastically_dominates(std::span<const double> p, std::span<const double> q,
                                         const std::vector<std::vector<std::size_t>>& upper_sets);

/// Product order over joint state indices.
PartialOrder joint_state_order(const System& system);

/// Concrete counterexample for a failed assumption. Every witness states an
/// inequality `larger >= smaller` that the instance violates.
struct Witness {
  enum class Kind { local_reward, global_reward, dominance };
  Kind kind = Kind::dominance;
  std::string message;
  int subprocess = -1;  // -1 for joint-level witnesses
  int action = -1;
  int state = -1;  // set for reward-in-action witnesses, where lower/upper are actions
  std::optional<Allocation> allocation;
  std::size_t lower = 0;  // lower state (or action for reward-in-action witnesses)
  std::size_t upper = 0;
  double larger = 0.0;   // the side that should be >=
  double smaller = 0.0;
  std::vector<double> dominant;   // dominance: row that should dominate
  std::vector<double> dominated;  // dominance: row that should be dominated
  std::vector<std::size_t> upper_set;
  ReachablePolicy alternative;    // A4 only
};

struct AssumptionResult {
  Verdict verdict = Verdict::not_checked;
  std::optional<Witness> witness;
  std::string note;
};

struct AssumptionReport {
  std::array<AssumptionResult, 5> assumptions;  // A1..A5
  std::vector<std::string> notes;

  const AssumptionResult& operator[](int k) const { return assumptions[static_cast<std::size_t>(k - 1)]; }
  bool sufficient() const;
  bool any_fails() const;
  bool any_not_checked() const;
};

struct AnalysisCaps {
  std::size_t upper_sets = kDefaultUpperSetCap;
  std::size_t policies = kDefaultPolicyCap;
};

AssumptionReport check_assumptions(const System& system, const AnalysisCaps& caps = {});

struct MonotoneCheck {
  bool holds = true;
  std::optional<std::pair<std::size_t, std::size_t>> witness;  // (s, s') with s <= s' and V(s) > V(s') + tol
};

inline constexpr double kMonotoneTolerance = 1e-9;

MonotoneCheck check_value_monotone(std::span<const double> v, const PartialOrder& order);

struct MyopicCheck {
  std::size_t state = 0;
  Allocation allocation;
  double copt_epoch_reward = 0.0;
  double myopic_epoch_reward = 0.0;
  bool myopic = false;
};

struct ComparisonReport {
  SolveResult copt;
  SolveResult fopt;
  ValueFunction lower_envelope;  // V^{phi_C*, T-myopic locals}
  ValueFunction gap;             // V_C* - V_F*
  double sup_gap = 0.0;
  double tolerance = 0.0;        // equivalence threshold 10 * epsilon
  bool equivalent = false;
  bool sandwich_holds = false;
  double sandwich_violation = 0.0;
  std::vector<MyopicCheck> myopic;

  bool all_myopic() const;
};

inline constexpr double kSandwichTolerance = 1e-6;

ComparisonReport compare_frameworks(const System& system, const SolveOptions& options = {});

/// R(s, a_g, pi_F^{a_g}) is non-decreasing along the joint order for every
/// feasible a_g. Returns the first violating (state, state, allocation).
std::optional<std::pair<std::pair<std::size_t, std::size_t>, Allocation>> find_epoch_reward_violation(
    const System& system);

}  // namespace hmdp
