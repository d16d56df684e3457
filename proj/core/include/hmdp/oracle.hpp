#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "hmdp/local.hpp"
#include "hmdp/model.hpp"
#include "hmdp/policy.hpp"
#include "hmdp/reachable.hpp"
#include "hmdp/solvers.hpp"

/// Brute-force references for tiny instances. Nothing here calls the DP
/// solvers; candidates are evaluated by exhaustive path expansion.
namespace hmdp::oracle {

struct EnumerationBudget {
  std::size_t joint_states = 64;
  std::size_t allocations = 64;
  std::size_t local_policies = 2'000'000;  // per enumeration root
  std::size_t pairs = 1'000'000;           // stationary global selections evaluated
};

/// brute_force_local result: the exact optimum at every augmented node.
LocalDPResult brute_force_local(const SubProcessModel& sub, int budget, int horizon, double gamma,
                                const EnumerationBudget& caps = {});

struct CoptOracleResult {
  SolveResult result;                  // value, phi and merged joint tables
  std::vector<ReachablePolicy> local;  // winning reachable policy per start state
  std::size_t candidates = 0;
  bool single_pair_attains = false;    // one candidate attains the max in every state
};

CoptOracleResult brute_force_copt(const System& system, const EnumerationBudget& caps = {});

/// Global-level enumeration with the locals fixed to the brute-force T-myopic policies.
CoptOracleResult brute_force_fopt(const System& system, const EnumerationBudget& caps = {});

/// Expected discounted reward and terminal distribution of one reachable
/// policy from `start`, by expanding every path.
struct PathOutcome {
  double reward = 0.0;
  std::vector<double> terminal;
};
PathOutcome expand_paths(const AugmentedChain& chain, const AugmentedNode& start, const ReachablePolicy& policy,
                         double gamma);

/// Solver-versus-oracle comparison. Values must agree to `tolerance` in every
/// state; policies must match exactly on the global level and on every
/// augmented node reachable under the oracle's policy.
struct Agreement {
  bool values = true;
  bool policies = true;
  double max_value_diff = 0.0;
  std::string detail;  // first disagreement, empty when both hold
  explicit operator bool() const { return values && policies; }
};
Agreement compare_with_oracle(const System& system, const SolveResult& solver, const CoptOracleResult& oracle,
                              double tolerance = 1e-6);
/// Full-table comparison of two local DP solutions.
Agreement compare_local(const LocalDPResult& solver, const LocalDPResult& oracle, double tolerance = 1e-6);

/// Plain Gaussian elimination with partial pivoting; throws on singular systems.
std::vector<double> solve_dense(std::vector<double> a, std::vector<double> b, std::size_t n);

}  // namespace hmdp::oracle
