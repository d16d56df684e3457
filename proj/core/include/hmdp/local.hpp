#pragma once

#include <cstddef>
#include <vector>

#include "hmdp/model.hpp"
#include "hmdp/policy.hpp"

namespace hmdp {

/// Relative slack under which two candidate values count as tied; ties go to
/// the earliest candidate (smallest action, lexicographically smallest allocation).
inline constexpr double kTieTolerance = 1e-12;

inline bool improves(double candidate, double best) {
  const double scale = best < 0 ? -best : best;
  return candidate > best + kTieTolerance * (scale > 1.0 ? scale : 1.0);
}

/// Backward-induction solution of the budget-constrained T-horizon local problem.
struct LocalDPResult {
  LocalPolicy policy;
  int horizon = 0;
  int budget = 0;
  std::size_t n_states = 0;
  std::size_t n_actions = 0;
  std::vector<double> value;  // v_t(s, b), t in 0..T, v_T == 0
  std::vector<double> q;      // q_t(s, b, a), t in 0..T-1; -inf where a > b. Empty unless requested.

  double v(int t, std::size_t s, int b) const {
    return value[(static_cast<std::size_t>(t) * n_states + s) * static_cast<std::size_t>(budget + 1) +
                 static_cast<std::size_t>(b)];
  }
  double q_value(int t, std::size_t s, int b, int a) const;

  /// Optimal epoch reward R_i(s) = v_0(s, budget).
  std::vector<double> epoch_value() const;
};

LocalDPResult solve_local(const SubProcessModel& sub, int budget, int horizon, double gamma,
                          bool keep_q = false);

/// The T-myopic local policy of every subprocess for allocation a_g.
std::vector<LocalPolicy> t_myopic_policy_vector(const System& system, const Allocation& a_g);

}  // namespace hmdp
