#include "hmdp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace hmdp::oracle {

namespace {

constexpr double kOracleTolerance = 1e-9;

bool strictly_better(double candidate, double best) {
  return candidate > best + kOracleTolerance * std::max(1.0, std::abs(best));
}

bool within(double candidate, double best) {
  return candidate >= best - kOracleTolerance * std::max(1.0, std::abs(best));
}

void expand(const AugmentedChain& chain, const ReachablePolicy& policy, double gamma, const AugmentedNode& node,
            double mass, double disc, PathOutcome& out) {
  if (node.t == chain.horizon()) {
    out.terminal[node.state] += mass;
    return;
  }
  const NodeDecision* d = find_decision(policy, node);
  if (d == nullptr) throw std::invalid_argument("policy has no decision at a reachable node");
  const auto& a = chain.feasible_actions(node.budget)[d->action];
  out.reward += mass * disc * chain.reward(node.state, a);
  const std::size_t rest = chain.spend(node.budget, a);
  chain.for_each_successor(node.state, a, [&](std::size_t to, double p) {
    expand(chain, policy, gamma, AugmentedNode{node.t + 1, to, rest}, mass * p, disc * gamma, out);
  });
}

/// One per-state choice: its epoch reward and next-state row.
struct Option {
  std::size_t allocation = 0;  // index into system.allocations()
  ReachablePolicy policy;
  double reward = 0.0;
  std::vector<double> row;
};

std::vector<double> evaluate(const std::vector<const Option*>& pick, double beta) {
  const std::size_t n = pick.size();
  std::vector<double> a(n * n, 0.0), b(n);
  for (std::size_t s = 0; s < n; ++s) {
    a[s * n + s] = 1.0;
    for (std::size_t t = 0; t < n; ++t) a[s * n + t] -= beta * pick[s]->row[t];
    b[s] = pick[s]->reward;
  }
  return solve_dense(std::move(a), std::move(b), n);
}

double q_value(const Option& o, const std::vector<double>& v, double beta) {
  double e = 0.0;
  for (std::size_t t = 0; t < v.size(); ++t) e += o.row[t] * v[t];
  return o.reward + beta * e;
}

/// Greedy choice with respect to v: the first option within tolerance of the best.
std::size_t greedy(const std::vector<Option>& opts, const std::vector<double>& v, double beta) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& o : opts) best = std::max(best, q_value(o, v, beta));
  for (std::size_t k = 0; k < opts.size(); ++k)
    if (within(q_value(opts[k], v, beta), best)) return k;
  return 0;
}

struct GlobalSolution {
  std::vector<double> value;
  std::vector<std::size_t> choice;
  std::size_t candidates = 0;
  bool single_pair_attains = false;
};

/// Optimal stationary selection over per-state options: every selection is
/// evaluated and the state-wise maximum taken. single_pair_attains records
/// whether the greedy selection at that maximum reaches it everywhere.
GlobalSolution solve_global(const std::vector<std::vector<Option>>& options, double beta, std::size_t pair_cap) {
  const std::size_t n = options.size();
  GlobalSolution sol;
  std::size_t product = 1;
  for (const auto& o : options) {
    if (o.empty()) throw std::logic_error("state without options");
    if (product > pair_cap / o.size())
      throw CapExceeded("oracle: stationary selections exceed the pair cap of " + std::to_string(pair_cap));
    product *= o.size();
  }
  std::vector<const Option*> pick(n);
  std::vector<int> idx(n, 0), limits(n);
  for (std::size_t s = 0; s < n; ++s) limits[s] = static_cast<int>(options[s].size()) - 1;
  sol.value.assign(n, -std::numeric_limits<double>::infinity());
  do {
    for (std::size_t s = 0; s < n; ++s) pick[s] = &options[s][static_cast<std::size_t>(idx[s])];
    const auto v = evaluate(pick, beta);
    ++sol.candidates;
    for (std::size_t s = 0; s < n; ++s) sol.value[s] = std::max(sol.value[s], v[s]);
  } while (next_lexicographic(idx, limits));

  sol.choice.resize(n);
  for (std::size_t s = 0; s < n; ++s) {
    sol.choice[s] = greedy(options[s], sol.value, beta);
    pick[s] = &options[s][sol.choice[s]];
  }
  const auto attained = evaluate(pick, beta);
  sol.single_pair_attains = true;
  for (std::size_t s = 0; s < n; ++s)
    if (std::abs(attained[s] - sol.value[s]) > 1e-7 * std::max(1.0, std::abs(sol.value[s])))
      sol.single_pair_attains = false;
  if (sol.single_pair_attains) sol.value = attained;
  return sol;
}

void check_size(const System& system, const EnumerationBudget& caps) {
  if (system.n_joint_states() > caps.joint_states)
    throw CapExceeded("oracle: " + std::to_string(system.n_joint_states()) + " joint states exceed the cap of " +
                      std::to_string(caps.joint_states));
  if (system.allocations().size() > caps.allocations)
    throw CapExceeded("oracle: " + std::to_string(system.allocations().size()) +
                      " allocations exceed the cap of " + std::to_string(caps.allocations));
}

std::vector<const SubProcessModel*> members(const System& system) {
  std::vector<const SubProcessModel*> subs;
  for (std::size_t i = 0; i < system.n_subprocesses(); ++i) subs.push_back(&system.sub(i));
  return subs;
}

CoptOracleResult assemble(const System& system, const std::vector<std::vector<Option>>& options,
                          const GlobalSolution& sol, Framework which) {
  CoptOracleResult out;
  out.result.framework = which;
  out.result.value = sol.value;
  out.result.converged = true;
  out.candidates = sol.candidates;
  out.single_pair_attains = sol.single_pair_attains;
  for (std::size_t s = 0; s < options.size(); ++s) {
    const Option& o = options[s][sol.choice[s]];
    out.result.global_policy.allocation.push_back(system.allocations()[o.allocation]);
    out.local.push_back(o.policy);
  }
  return out;
}

}  // namespace

PathOutcome expand_paths(const AugmentedChain& chain, const AugmentedNode& start, const ReachablePolicy& policy,
                         double gamma) {
  PathOutcome out;
  out.terminal.assign(chain.states().size(), 0.0);
  expand(chain, policy, gamma, start, 1.0, 1.0, out);
  return out;
}

std::vector<double> solve_dense(std::vector<double> a, std::vector<double> b, std::size_t n) {
  if (a.size() != n * n || b.size() != n) throw std::invalid_argument("solve_dense: shape mismatch");
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r * n + c]) > std::abs(a[piv * n + c])) piv = r;
    if (std::abs(a[piv * n + c]) < 1e-300) throw std::runtime_error("solve_dense: singular matrix");
    if (piv != c) {
      for (std::size_t k = 0; k < n; ++k) std::swap(a[c * n + k], a[piv * n + k]);
      std::swap(b[c], b[piv]);
    }
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r * n + c] / a[c * n + c];
      if (f == 0.0) continue;
      for (std::size_t k = c; k < n; ++k) a[r * n + k] -= f * a[c * n + k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[i * n + k] * x[k];
    x[i] = s / a[i * n + i];
  }
  return x;
}

LocalDPResult brute_force_local(const SubProcessModel& sub, int budget, int horizon, double gamma,
                                const EnumerationBudget& caps) {
  const std::size_t n = sub.n_states();
  const auto nb = static_cast<std::size_t>(budget + 1);
  const AugmentedChain chain({&sub}, {budget}, horizon);
  LocalDPResult res;
  res.policy = LocalPolicy(horizon, n, budget);
  res.horizon = horizon;
  res.budget = budget;
  res.n_states = n;
  res.n_actions = sub.n_actions();
  res.value.assign((static_cast<std::size_t>(horizon) + 1) * n * nb, 0.0);
  for (int t = 0; t < horizon; ++t) {
    for (std::size_t s = 0; s < n; ++s) {
      for (std::size_t b = 0; b < nb; ++b) {
        const AugmentedNode start{t, s, b};
        double best = -std::numeric_limits<double>::infinity();
        std::size_t best_action = 0;
        const auto stats = for_each_reachable_policy(chain, start, caps.local_policies, [&](const ReachablePolicy& p) {
          const double r = expand_paths(chain, start, p, gamma).reward;
          if (strictly_better(r, best) || best == -std::numeric_limits<double>::infinity()) {
            best = r;
            best_action = p.front().action;
          }
          return true;
        });
        if (stats.truncated) throw CapExceeded("oracle: local policy enumeration exceeded its cap");
        res.value[(static_cast<std::size_t>(t) * n + s) * nb + b] = best;
        res.policy.set_action(t, s, static_cast<int>(b), chain.feasible_actions(b)[best_action][0]);
      }
    }
  }
  return res;
}

CoptOracleResult brute_force_copt(const System& system, const EnumerationBudget& caps) {
  check_size(system, caps);
  const auto subs = members(system);
  const std::size_t n = system.n_joint_states();
  std::vector<std::vector<Option>> options(n);
  std::vector<AugmentedChain> chains;
  for (const auto& a_g : system.allocations()) chains.emplace_back(subs, a_g.per_subprocess, system.horizon());

  for (std::size_t j = 0; j < chains.size(); ++j) {
    const auto& chain = chains[j];
    const Allocation& a_g = system.allocations()[j];
    for (std::size_t s = 0; s < n; ++s) {
      const AugmentedNode start{0, s, chain.full_budget()};
      const auto stats = for_each_reachable_policy(chain, start, caps.local_policies, [&](const ReachablePolicy& p) {
        auto out = expand_paths(chain, start, p, system.gamma());
        options[s].push_back(Option{j, p, out.reward + system.global_reward(s, a_g), std::move(out.terminal)});
        return true;
      });
      if (stats.truncated) throw CapExceeded("oracle: joint local policy enumeration exceeded its cap");
    }
  }
  const auto sol = solve_global(options, system.beta(), caps.pairs);
  auto out = assemble(system, options, sol, Framework::copt);

  // Merge the winning reachable policies into one joint table per allocation.
  std::map<Allocation, JointLocalPolicy> tables;
  for (std::size_t s = 0; s < n; ++s) {
    const Option& o = options[s][sol.choice[s]];
    const Allocation& a_g = system.allocations()[o.allocation];
    auto it = tables.find(a_g);
    if (it == tables.end()) it = tables.emplace(a_g, JointLocalPolicy(system.horizon(), system.states(), a_g)).first;
    for (const auto& d : o.policy) {
      const auto& a = chains[o.allocation].feasible_actions(d.node.budget)[d.action];
      it->second.set_action(d.node.t, d.node.state, d.node.budget, a);
    }
  }
  for (auto& [a_g, table] : tables) out.result.local_policies.emplace(a_g, std::move(table));
  return out;
}

CoptOracleResult brute_force_fopt(const System& system, const EnumerationBudget& caps) {
  check_size(system, caps);
  const auto subs = members(system);
  const std::size_t n = system.n_joint_states();
  const std::size_t n_sub = system.n_subprocesses();

  std::map<std::pair<std::size_t, int>, LocalDPResult> cache;
  auto local = [&](std::size_t i, int grant) -> const LocalDPResult& {
    auto it = cache.find({i, grant});
    if (it == cache.end())
      it = cache.emplace(std::make_pair(i, grant),
                         brute_force_local(system.sub(i), grant, system.horizon(), system.gamma(), caps))
               .first;
    return it->second;
  };

  std::vector<std::vector<Option>> options(n);
  std::map<Allocation, std::vector<LocalPolicy>> locals;
  for (std::size_t j = 0; j < system.allocations().size(); ++j) {
    const Allocation& a_g = system.allocations()[j];
    const AugmentedChain chain(subs, a_g.per_subprocess, system.horizon());
    std::vector<LocalPolicy> pol;
    for (std::size_t i = 0; i < n_sub; ++i) pol.push_back(local(i, a_g[i]).policy);

    for (std::size_t s = 0; s < n; ++s) {
      // Reachable nodes of the product policy, with the decision each local makes.
      ReachablePolicy joint;
      std::set<AugmentedNode> frontier{AugmentedNode{0, s, chain.full_budget()}};
      std::vector<int> action(n_sub);
      for (int t = 0; t < system.horizon(); ++t) {
        std::set<AugmentedNode> next;
        for (const auto& node : frontier) {
          for (std::size_t i = 0; i < n_sub; ++i)
            action[i] = pol[i].action(t, static_cast<std::size_t>(chain.states().digit(node.state, i)),
                                      chain.budgets().digit(node.budget, i));
          const auto& feasible = chain.feasible_actions(node.budget);
          const auto idx = static_cast<std::size_t>(std::find(feasible.begin(), feasible.end(), action) -
                                                    feasible.begin());
          if (idx == feasible.size()) throw std::logic_error("oracle: local action is not feasible");
          joint.push_back(NodeDecision{node, idx});
          const std::size_t rest = chain.spend(node.budget, action);
          chain.for_each_successor(node.state, action,
                                   [&](std::size_t to, double) { next.insert(AugmentedNode{t + 1, to, rest}); });
        }
        frontier = std::move(next);
      }
      auto out = expand_paths(chain, AugmentedNode{0, s, chain.full_budget()}, joint, system.gamma());
      options[s].push_back(
          Option{j, std::move(joint), out.reward + system.global_reward(s, a_g), std::move(out.terminal)});
    }
    locals.emplace(a_g, std::move(pol));
  }
  const auto sol = solve_global(options, system.beta(), caps.pairs);
  auto out = assemble(system, options, sol, Framework::fopt);
  for (const auto& a_g : out.result.global_policy.allocation)
    if (!out.result.local_policies.count(a_g)) out.result.local_policies.emplace(a_g, locals.at(a_g));
  return out;
}

Agreement compare_with_oracle(const System& system, const SolveResult& solver, const CoptOracleResult& oracle,
                              double tolerance) {
  Agreement ag;
  const std::size_t n = system.n_joint_states();
  for (std::size_t s = 0; s < n; ++s) {
    const double d = std::abs(solver.value[s] - oracle.result.value[s]);
    ag.max_value_diff = std::max(ag.max_value_diff, d);
    if (d > tolerance && ag.values) {
      ag.values = false;
      std::ostringstream os;
      os << "state " << s << ": solver value " << solver.value[s] << " vs oracle " << oracle.result.value[s];
      if (ag.detail.empty()) ag.detail = os.str();
    }
  }
  const auto subs = members(system);
  std::map<Allocation, JointLocalPolicy> lifted;
  for (std::size_t s = 0; s < n && ag.policies; ++s) {
    const Allocation& a_g = solver.global_policy(s);
    if (!(a_g == oracle.result.global_policy(s))) {
      ag.policies = false;
      ag.detail = "state " + std::to_string(s) + ": solver allocation " + to_string(a_g) + " vs oracle " +
                  to_string(oracle.result.global_policy(s));
      break;
    }
    auto it = lifted.find(a_g);
    if (it == lifted.end()) it = lifted.emplace(a_g, lift(system, a_g, solver.local_policies.at(a_g))).first;
    const AugmentedChain chain(subs, a_g.per_subprocess, system.horizon());
    for (const auto& d : oracle.local[s]) {
      const auto& want = chain.feasible_actions(d.node.budget)[d.action];
      const auto got = it->second.action(d.node.t, d.node.state, d.node.budget);
      if (!std::equal(want.begin(), want.end(), got.begin(), got.end())) {
        ag.policies = false;
        std::ostringstream os;
        os << "start state " << s << ", node (t=" << d.node.t << ", state " << d.node.state << ", budget code "
           << d.node.budget << "): solver action " << to_string(Allocation{std::vector<int>(got.begin(), got.end())})
           << " vs oracle " << to_string(Allocation{want});
        ag.detail = os.str();
        break;
      }
    }
  }
  return ag;
}

Agreement compare_local(const LocalDPResult& solver, const LocalDPResult& oracle, double tolerance) {
  Agreement ag;
  if (solver.horizon != oracle.horizon || solver.budget != oracle.budget || solver.n_states != oracle.n_states) {
    ag.values = ag.policies = false;
    ag.detail = "local problems differ in shape";
    return ag;
  }
  for (int t = 0; t <= solver.horizon; ++t) {
    for (std::size_t s = 0; s < solver.n_states; ++s) {
      for (int b = 0; b <= solver.budget; ++b) {
        const double d = std::abs(solver.v(t, s, b) - oracle.v(t, s, b));
        ag.max_value_diff = std::max(ag.max_value_diff, d);
        if (d > tolerance && ag.values) {
          ag.values = false;
          if (ag.detail.empty())
            ag.detail = "v_" + std::to_string(t) + "(" + std::to_string(s) + "," + std::to_string(b) + ") differs";
        }
        if (t < solver.horizon && solver.policy.action(t, s, b) != oracle.policy.action(t, s, b) && ag.policies) {
          ag.policies = false;
          if (ag.detail.empty())
            ag.detail = "action at (t=" + std::to_string(t) + ", s=" + std::to_string(s) + ", b=" +
                        std::to_string(b) + ") differs";
        }
      }
    }
  }
  return ag;
}

}  // namespace hmdp::oracle
