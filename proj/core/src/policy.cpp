#include "hmdp/policy.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace hmdp {

LocalPolicy::LocalPolicy(int horizon, std::size_t n_states, int budget)
    : horizon_(horizon), n_states_(n_states), budget_(budget) {
  if (horizon < 1 || budget < 0) throw std::invalid_argument("local policy needs horizon >= 1 and budget >= 0");
  table_.assign(static_cast<std::size_t>(horizon) * n_states * static_cast<std::size_t>(budget + 1), 0);
}

void LocalPolicy::set_action(int t, std::size_t s, int remaining, int a) {
  if (t < 0 || t >= horizon_ || s >= n_states_ || remaining < 0 || remaining > budget_)
    throw std::out_of_range("local policy index out of range");
  if (a < 0 || a > remaining)
    throw std::invalid_argument("action " + std::to_string(a) + " exceeds remaining budget " +
                                std::to_string(remaining));
  table_[index(t, s, remaining)] = a;
}

namespace {

MixedRadix budget_radix(const Allocation& grant) {
  std::vector<std::size_t> radices;
  for (int g : grant.per_subprocess) {
    if (g < 0) throw std::invalid_argument("negative grant");
    radices.push_back(static_cast<std::size_t>(g) + 1);
  }
  return MixedRadix(radices);
}

}  // namespace

JointLocalPolicy::JointLocalPolicy(int horizon, MixedRadix states, Allocation grant)
    : horizon_(horizon), states_(std::move(states)), grant_(std::move(grant)), budgets_(budget_radix(grant_)) {
  if (horizon < 1) throw std::invalid_argument("joint policy needs horizon >= 1");
  if (states_.digits() != grant_.size()) throw std::invalid_argument("grant size does not match the state space");
  table_.assign(static_cast<std::size_t>(horizon) * states_.size() * budgets_.size() * grant_.size(), 0);
}

void JointLocalPolicy::set_action(int t, std::size_t joint_state, std::size_t budget_code, std::span<const int> a) {
  if (t < 0 || t >= horizon_ || joint_state >= states_.size() || budget_code >= budgets_.size())
    throw std::out_of_range("joint policy index out of range");
  if (a.size() != grant_.size()) throw std::invalid_argument("joint action has the wrong length");
  for (std::size_t i = 0; i < a.size(); ++i) {
    const int remaining = budgets_.digit(budget_code, i);
    if (a[i] < 0 || a[i] > remaining)
      throw std::invalid_argument("action " + std::to_string(a[i]) + " of subprocess " + std::to_string(i) +
                                  " exceeds remaining budget " + std::to_string(remaining));
  }
  std::copy(a.begin(), a.end(), table_.begin() + static_cast<std::ptrdiff_t>(offset(t, joint_state, budget_code)));
}

JointLocalPolicy lift(const System& system, const Allocation& grant, std::span<const LocalPolicy> locals) {
  const std::size_t n = system.n_subprocesses();
  if (locals.size() != n) throw std::invalid_argument("one local policy per subprocess is required");
  JointLocalPolicy joint(system.horizon(), system.states(), grant);
  std::vector<int> s(n), b(n), a(n);
  for (int t = 0; t < system.horizon(); ++t) {
    for (std::size_t si = 0; si < system.n_joint_states(); ++si) {
      system.states().decode(si, s);
      for (std::size_t bi = 0; bi < joint.budgets().size(); ++bi) {
        joint.budgets().decode(bi, b);
        for (std::size_t i = 0; i < n; ++i) {
          if (b[i] > locals[i].budget())
            throw std::invalid_argument("local policy of subprocess " + std::to_string(i) +
                                        " covers budget " + std::to_string(locals[i].budget()) + " < grant " +
                                        std::to_string(grant[i]));
          a[i] = locals[i].action(t, static_cast<std::size_t>(s[i]), b[i]);
        }
        joint.set_action(t, si, bi, a);
      }
    }
  }
  return joint;
}

JointLocalPolicy lift(const System& system, const Allocation& grant, const LocalPlan& plan) {
  if (const auto* joint = std::get_if<JointLocalPolicy>(&plan)) {
    if (!(joint->grant() == grant)) throw std::invalid_argument("joint policy was built for another grant");
    return *joint;
  }
  return lift(system, grant, std::get<std::vector<LocalPolicy>>(plan));
}

}  // namespace hmdp
