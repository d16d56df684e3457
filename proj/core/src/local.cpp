#include "hmdp/local.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>

namespace hmdp {

double LocalDPResult::q_value(int t, std::size_t s, int b, int a) const {
  if (q.empty()) throw std::logic_error("q-values were not retained");
  const std::size_t nb = static_cast<std::size_t>(budget + 1);
  return q[((static_cast<std::size_t>(t) * n_states + s) * nb + static_cast<std::size_t>(b)) * n_actions +
           static_cast<std::size_t>(a)];
}

std::vector<double> LocalDPResult::epoch_value() const {
  std::vector<double> out(n_states);
  for (std::size_t s = 0; s < n_states; ++s) out[s] = v(0, s, budget);
  return out;
}

LocalDPResult solve_local(const SubProcessModel& sub, int budget, int horizon, double gamma, bool keep_q) {
  if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
  if (budget < 0) throw std::invalid_argument("budget must be non-negative");
  const std::size_t n = sub.n_states();
  const std::size_t m = sub.n_actions();
  const std::size_t nb = static_cast<std::size_t>(budget) + 1;

  LocalDPResult res;
  res.policy = LocalPolicy(horizon, n, budget);
  res.horizon = horizon;
  res.budget = budget;
  res.n_states = n;
  res.n_actions = m;
  res.value.assign(static_cast<std::size_t>(horizon + 1) * n * nb, 0.0);
  if (keep_q)
    res.q.assign(static_cast<std::size_t>(horizon) * n * nb * m, -std::numeric_limits<double>::infinity());

  auto vidx = [&](int t, std::size_t s, std::size_t b) { return (static_cast<std::size_t>(t) * n + s) * nb + b; };

  for (int t = horizon - 1; t >= 0; --t) {
    for (std::size_t s = 0; s < n; ++s) {
      for (std::size_t b = 0; b < nb; ++b) {
        const std::size_t top = std::min(b, m - 1);
        double best = -std::numeric_limits<double>::infinity();
        std::size_t best_a = 0;
        for (std::size_t a = 0; a <= top; ++a) {
          const Matrix& p = sub.transition[a];
          double future = 0.0;
          for (std::size_t s2 = 0; s2 < n; ++s2) future += p(s, s2) * res.value[vidx(t + 1, s2, b - a)];
          const double q = sub.reward(s, a) + gamma * future;
          if (keep_q) res.q[vidx(t, s, b) * m + a] = q;
          if (a == 0 || improves(q, best)) {
            best = q;
            best_a = a;
          }
        }
        res.value[vidx(t, s, b)] = best;
        res.policy.set_action(t, s, static_cast<int>(b), static_cast<int>(best_a));
      }
    }
  }
  return res;
}

std::vector<LocalPolicy> t_myopic_policy_vector(const System& system, const Allocation& a_g) {
  if (a_g.size() != system.n_subprocesses()) throw std::invalid_argument("allocation has the wrong length");
  std::vector<LocalPolicy> out;
  out.reserve(a_g.size());
  for (std::size_t i = 0; i < a_g.size(); ++i) {
    if (a_g[i] < 0 || a_g[i] >= system.model().K)
      throw std::invalid_argument("allocation component " + std::to_string(a_g[i]) + " outside {0..K-1}");
    out.push_back(solve_local(system.sub(i), a_g[i], system.horizon(), system.gamma()).policy);
  }
  return out;
}

}  // namespace hmdp
