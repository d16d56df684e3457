#include "hmdp/epoch.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace hmdp {

LocalEpoch local_epoch(const SubProcessModel& sub, const LocalPolicy& policy, int granted, int horizon,
                       double gamma) {
  const std::size_t n = sub.n_states();
  if (policy.horizon() != horizon || policy.n_states() != n)
    throw std::invalid_argument("local policy shape does not match the subprocess");
  if (granted < 0 || granted > policy.budget())
    throw std::invalid_argument("infeasible policy: grant " + std::to_string(granted) +
                                " exceeds the budget the policy covers (" + std::to_string(policy.budget()) + ")");
  const std::size_t nb = static_cast<std::size_t>(granted) + 1;
  LocalEpoch out{Matrix(n, n), std::vector<double>(n, 0.0)};
  std::vector<double> dist(n * nb), next(n * nb);
  for (std::size_t start = 0; start < n; ++start) {
    std::fill(dist.begin(), dist.end(), 0.0);
    dist[start * nb + static_cast<std::size_t>(granted)] = 1.0;
    double discount = 1.0;
    for (int t = 0; t < horizon; ++t) {
      std::fill(next.begin(), next.end(), 0.0);
      for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t b = 0; b < nb; ++b) {
          const double mass = dist[s * nb + b];
          if (mass == 0.0) continue;
          const int a = policy.action(t, s, static_cast<int>(b));
          if (a < 0 || a > static_cast<int>(b))
            throw std::invalid_argument("infeasible policy: action exceeds remaining budget");
          if (static_cast<std::size_t>(a) >= sub.n_actions())
            throw std::invalid_argument("policy action " + std::to_string(a) + " outside the action space");
          out.reward[start] += mass * discount * sub.reward(s, static_cast<std::size_t>(a));
          const Matrix& p = sub.transition[static_cast<std::size_t>(a)];
          const std::size_t nb_next = b - static_cast<std::size_t>(a);
          for (std::size_t s2 = 0; s2 < n; ++s2) next[s2 * nb + nb_next] += mass * p(s, s2);
        }
      }
      dist.swap(next);
      discount *= gamma;
    }
    for (std::size_t s = 0; s < n; ++s) {
      double m = 0.0;
      for (std::size_t b = 0; b < nb; ++b) m += dist[s * nb + b];
      out.marginal(start, s) = m;
    }
  }
  return out;
}

EpochKernel epoch_kernel(const System& system, const Allocation& a_g, std::span<const LocalPolicy> pi) {
  const std::size_t n_sub = system.n_subprocesses();
  if (pi.size() != n_sub || a_g.size() != n_sub)
    throw std::invalid_argument("allocation and policy vector must have one entry per subprocess");
  std::vector<LocalEpoch> locals;
  locals.reserve(n_sub);
  for (std::size_t i = 0; i < n_sub; ++i)
    locals.push_back(local_epoch(system.sub(i), pi[i], a_g[i], system.horizon(), system.gamma()));

  const auto& states = system.states();
  const std::size_t n = states.size();
  EpochKernel k{Matrix(n, n), std::vector<double>(n, 0.0)};
  for (std::size_t s = 0; s < n; ++s) {
    double r = system.global_reward(s, a_g);
    for (std::size_t i = 0; i < n_sub; ++i) r += locals[i].reward[static_cast<std::size_t>(states.digit(s, i))];
    k.reward[s] = r;
    for (std::size_t s2 = 0; s2 < n; ++s2) {
      double p = 1.0;
      for (std::size_t i = 0; i < n_sub && p != 0.0; ++i)
        p *= locals[i].marginal(static_cast<std::size_t>(states.digit(s, i)), static_cast<std::size_t>(states.digit(s2, i)));
      k.transition(s, s2) = p;
    }
  }
  return k;
}

EpochKernel epoch_kernel(const System& system, const Allocation& a_g, const JointLocalPolicy& pi) {
  const std::size_t n_sub = system.n_subprocesses();
  if (!(pi.grant() == a_g)) throw std::invalid_argument("joint policy was built for another grant");
  if (pi.horizon() != system.horizon() || !(pi.states() == system.states()))
    throw std::invalid_argument("joint policy shape does not match the system");
  const auto& states = system.states();
  const auto& budgets = pi.budgets();
  const std::size_t n = states.size();
  const std::size_t nb = budgets.size();
  const double gamma = system.gamma();

  EpochKernel k{Matrix(n, n), std::vector<double>(n, 0.0)};
  std::vector<double> dist(n * nb), next(n * nb);
  std::vector<int> s(n_sub), b(n_sub), s2(n_sub);
  for (std::size_t start = 0; start < n; ++start) {
    std::fill(dist.begin(), dist.end(), 0.0);
    dist[start * nb + (nb - 1)] = 1.0;
    double local_reward = 0.0;
    double discount = 1.0;
    for (int t = 0; t < system.horizon(); ++t) {
      std::fill(next.begin(), next.end(), 0.0);
      for (std::size_t si = 0; si < n; ++si) {
        states.decode(si, s);
        for (std::size_t bi = 0; bi < nb; ++bi) {
          const double mass = dist[si * nb + bi];
          if (mass == 0.0) continue;
          budgets.decode(bi, b);
          const auto a = pi.action(t, si, bi);
          double r = 0.0;
          for (std::size_t i = 0; i < n_sub; ++i) {
            if (a[i] > b[i]) throw std::invalid_argument("infeasible policy: action exceeds remaining budget");
            if (static_cast<std::size_t>(a[i]) >= system.sub(i).n_actions())
              throw std::invalid_argument("policy action outside the action space");
            r += system.sub(i).reward(static_cast<std::size_t>(s[i]), static_cast<std::size_t>(a[i]));
            b[i] -= a[i];
          }
          local_reward += mass * discount * r;
          const std::size_t bnext = budgets.encode(b);
          for (std::size_t sj = 0; sj < n; ++sj) {
            double p = mass;
            for (std::size_t i = 0; i < n_sub && p != 0.0; ++i)
              p *= system.sub(i).transition[static_cast<std::size_t>(a[i])](static_cast<std::size_t>(s[i]),
                                                                           static_cast<std::size_t>(states.digit(sj, i)));
            if (p != 0.0) next[sj * nb + bnext] += p;
          }
        }
      }
      dist.swap(next);
      discount *= gamma;
    }
    for (std::size_t sj = 0; sj < n; ++sj) {
      double m = 0.0;
      for (std::size_t bi = 0; bi < nb; ++bi) m += dist[sj * nb + bi];
      k.transition(start, sj) = m;
    }
    k.reward[start] = system.global_reward(start, a_g) + local_reward;
  }
  return k;
}

EpochKernel epoch_kernel(const System& system, const Allocation& a_g, const LocalPlan& pi) {
  if (const auto* joint = std::get_if<JointLocalPolicy>(&pi)) return epoch_kernel(system, a_g, *joint);
  return epoch_kernel(system, a_g, std::span<const LocalPolicy>(std::get<std::vector<LocalPolicy>>(pi)));
}

void apply_product_kernel(const MixedRadix& states, std::span<const Matrix* const> factors,
                          std::span<const double> in, std::span<double> out) {
  const std::size_t n = states.size();
  if (factors.size() != states.digits() || in.size() != n || out.size() != n)
    throw std::invalid_argument("product kernel shape mismatch");
  std::vector<double> cur(in.begin(), in.end()), tmp(n);
  for (std::size_t axis = 0; axis < factors.size(); ++axis) {
    const Matrix& m = *factors[axis];
    const std::size_t radix = states.radix(axis);
    const std::size_t stride = states.stride(axis);
    const std::size_t block = radix * stride;
    for (std::size_t base = 0; base < n; base += block) {
      for (std::size_t inner = 0; inner < stride; ++inner) {
        const std::size_t origin = base + inner;
        for (std::size_t r = 0; r < radix; ++r) {
          double acc = 0.0;
          for (std::size_t c = 0; c < radix; ++c) acc += m(r, c) * cur[origin + c * stride];
          tmp[origin + r * stride] = acc;
        }
      }
    }
    cur.swap(tmp);
  }
  std::copy(cur.begin(), cur.end(), out.begin());
}

}  // namespace hmdp
