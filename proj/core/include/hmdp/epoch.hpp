#pragma once

#include <span>
#include <vector>

#include "hmdp/matrix.hpp"
#include "hmdp/model.hpp"
#include "hmdp/policy.hpp"

namespace hmdp {

/// Slow-timescale transition and reward induced by (a_g, pi).
struct EpochKernel {
  Matrix transition;          // p^ep(s, s') over joint states
  std::vector<double> reward; // R(s, a_g, pi(s))
};

/// One subprocess's epoch marginal: T-step kernel of the augmented chain
/// started at (s, granted budget), with the terminal budget summed out.
struct LocalEpoch {
  Matrix marginal;
  std::vector<double> reward;  // E[sum_t gamma^t r(s_t, a_t)]
};

LocalEpoch local_epoch(const SubProcessModel& sub, const LocalPolicy& policy, int granted, int horizon,
                       double gamma);

EpochKernel epoch_kernel(const System& system, const Allocation& a_g, std::span<const LocalPolicy> pi);
EpochKernel epoch_kernel(const System& system, const Allocation& a_g, const JointLocalPolicy& pi);
EpochKernel epoch_kernel(const System& system, const Allocation& a_g, const LocalPlan& pi);
inline EpochKernel epoch_kernel(const System& system, const Allocation& a_g, const std::vector<LocalPolicy>& pi) {
  return epoch_kernel(system, a_g, std::span<const LocalPolicy>(pi));
}

/// out(s) = sum_{s'} prod_i factors[i](s_i, s'_i) * in(s'), over row-major
/// joint indices described by `states`.
void apply_product_kernel(const MixedRadix& states, std::span<const Matrix* const> factors,
                          std::span<const double> in, std::span<double> out);

}  // namespace hmdp
