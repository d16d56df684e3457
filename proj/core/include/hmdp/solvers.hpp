#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hmdp/epoch.hpp"
#include "hmdp/local.hpp"
#include "hmdp/model.hpp"
#include "hmdp/policy.hpp"

namespace hmdp {

enum class Framework { copt, fopt };

std::string to_string(Framework f);

/// Default limit on prod n_i * prod (a_g[i] + 1) for the central inner DP.
inline constexpr std::size_t kDefaultJointCap = 1'000'000;

/// Raised when an instance is too large for the requested exact method.
class CapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// All vectors in {0..K-1}^N with sum <= B (or == B), lexicographic order.
std::vector<Allocation> enumerate_allocations(const SystemModel& model);

/// One Bellman sweep: new values and the maximizing allocation per state.
struct Backup {
  ValueFunction value;
  GlobalPolicy policy;
};

/// Federal operator B_F. T-myopic locals and their epoch marginals are
/// computed once per allocation at construction.
class FederalOperator {
 public:
  explicit FederalOperator(const System& system);

  const System& system() const { return *system_; }
  Backup apply(std::span<const double> v) const;

  const std::vector<LocalPolicy>& locals(std::size_t allocation_index) const {
    return per_allocation_[allocation_index].locals;
  }
  /// R(s, a_g, pi_F^{a_g}) for every joint state.
  const std::vector<double>& epoch_reward(std::size_t allocation_index) const {
    return per_allocation_[allocation_index].reward;
  }
  /// sum_{s'} p^ep(s, s') v(s') for every s under allocation `allocation_index`.
  std::vector<double> expected_next(std::size_t allocation_index, std::span<const double> v) const;

 private:
  struct Entry {
    std::vector<LocalPolicy> locals;
    std::vector<const Matrix*> marginals;
    std::vector<double> reward;
  };
  const System* system_;
  std::map<std::pair<std::size_t, int>, LocalEpoch> cache_;
  std::vector<Entry> per_allocation_;
};

/// Central operator B_C. The inner max over local policies is solved exactly
/// by backward induction on the joint augmented state with terminal value beta*V.
class CentralOperator {
 public:
  explicit CentralOperator(const System& system, std::size_t joint_cap = kDefaultJointCap);

  const System& system() const { return *system_; }

  struct Inner {
    std::vector<double> value;  // max_pi R(s, a_g, pi) + beta * E[V(s')], per s
    JointLocalPolicy policy;    // filled only when requested
  };
  Inner solve_inner(const Allocation& a_g, std::span<const double> v, bool keep_policy) const;

  Backup apply(std::span<const double> v) const;

  /// Backup plus the achieving joint policy for every allocation used.
  Backup apply(std::span<const double> v, std::map<Allocation, JointLocalPolicy>& policies) const;

 private:
  const System* system_;
  std::size_t joint_cap_;
};

Backup bellman_fopt(const System& system, std::span<const double> v);

struct CentralBackup {
  ValueFunction value;
  GlobalPolicy policy;
  std::map<Allocation, JointLocalPolicy> local;
};
CentralBackup bellman_copt(const System& system, std::span<const double> v,
                           std::size_t joint_cap = kDefaultJointCap);

struct SolveOptions {
  double epsilon = 1e-8;
  int max_iter = 100'000;
  std::size_t joint_cap = kDefaultJointCap;
};

struct SolveResult {
  Framework framework = Framework::copt;
  ValueFunction value;
  GlobalPolicy global_policy;
  LocalPlanMap local_policies;  // keyed by every allocation used by global_policy
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
  double epsilon = 0.0;
  int max_iter = 0;
};

/// Sup-norm residual at which iteration stops: epsilon * (1 - beta) / (2 beta).
double stopping_threshold(double epsilon, double beta);

/// Iterates the chosen operator from V = 0 and extracts greedy policies at the
/// final value. Non-convergence is reported through `converged`.
SolveResult value_iteration(const System& system, Framework which, const SolveOptions& options = {});

/// Exact value of (phi, pi): solves V = R + beta P V.
ValueFunction evaluate_policy_exact(const System& system, const GlobalPolicy& phi, const LocalPlanMap& pi);

struct McEstimate {
  ValueFunction mean;
  std::vector<double> standard_error;
  int horizon = 0;
  int episodes = 0;
  std::uint64_t seed = 0;
};

/// Seeded Monte Carlo rollouts of `horizon` epochs from every start state.
McEstimate evaluate_policy_mc(const System& system, const GlobalPolicy& phi, const LocalPlanMap& pi,
                              int horizon, int episodes, std::uint64_t seed);

double sup_norm_diff(std::span<const double> a, std::span<const double> b);

}  // namespace hmdp
