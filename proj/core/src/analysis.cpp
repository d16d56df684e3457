#include "hmdp/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hmdp/epoch.hpp"
#include "hmdp/local.hpp"

namespace hmdp {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::holds: return "holds";
    case Verdict::fails: return "fails";
    case Verdict::not_checked: return "not-checked";
  }
  return "?";
}

using UpperSets = std::vector<std::vector<std::size_t>>;

std::optional<UpperSets> enumerate_upper_sets(const PartialOrder& order, std::size_t cap) {
  const std::size_t n = order.size();
  const auto ext = order.linear_extension();
  UpperSets out;
  std::vector<char> in(n, 0);
  bool overflow = false;

  // Decide elements from the top of the linear extension down; an element may
  // join only when everything above it already has.
  auto rec = [&](auto&& self, std::size_t pos) -> void {
    if (overflow) return;
    if (pos == 0) {
      if (out.size() >= cap) {
        overflow = true;
        return;
      }
      std::vector<std::size_t> members;
      for (std::size_t i = 0; i < n; ++i)
        if (in[i]) members.push_back(i);
      out.push_back(std::move(members));
      return;
    }
    const std::size_t e = ext[pos - 1];
    in[e] = 0;
    self(self, pos - 1);
    bool can_join = true;
    for (std::size_t j = 0; j < n && can_join; ++j)
      if (j != e && order.leq(e, j) && !in[j]) can_join = false;
    if (can_join) {
      in[e] = 1;
      self(self, pos - 1);
      in[e] = 0;
    }
  };
  rec(rec, n);
  if (overflow) return std::nullopt;
  return out;
}

namespace {

void check_distribution(std::span<const double> p, const char* name) {
  double sum = 0.0;
  for (double x : p) sum += x;
  if (std::abs(sum - 1.0) > kStochasticTolerance)
    throw std::invalid_argument(std::string("distribution ") + name + " does not sum to 1");
}

}  // namespace

DominanceResult stochastically_dominates(std::span<const double> p, std::span<const double> q,
                                         const UpperSets& upper_sets) {
  DominanceResult res;
  double worst = 0.0;
  for (const auto& u : upper_sets) {
    double mp = 0.0, mq = 0.0;
    for (std::size_t i : u) {
      mp += p[i];
      mq += q[i];
    }
    if (mp < mq - kDominanceTolerance && mq - mp > worst) {
      worst = mq - mp;
      res.verdict = Verdict::fails;
      res.upper_set = u;
      res.mass_p = mp;
      res.mass_q = mq;
    }
  }
  return res;
}

DominanceResult stochastically_dominates(std::span<const double> p, std::span<const double> q,
                                         const PartialOrder& order, std::size_t cap) {
  if (p.size() != q.size() || p.size() != order.size())
    throw std::invalid_argument("distributions and order must have the same size");
  check_distribution(p, "p");
  check_distribution(q, "q");
  const auto sets = enumerate_upper_sets(order, cap);
  if (!sets) return DominanceResult{Verdict::not_checked, {}, 0.0, 0.0};
  return stochastically_dominates(p, q, *sets);
}

PartialOrder joint_state_order(const System& system) {
  std::vector<PartialOrder> factors;
  for (std::size_t i = 0; i < system.n_subprocesses(); ++i) factors.push_back(system.state_order(i));
  return PartialOrder::product(factors);
}

bool AssumptionReport::sufficient() const {
  return std::all_of(assumptions.begin(), assumptions.end(),
                     [](const AssumptionResult& r) { return r.verdict == Verdict::holds; });
}

bool AssumptionReport::any_fails() const {
  return std::any_of(assumptions.begin(), assumptions.end(),
                     [](const AssumptionResult& r) { return r.verdict == Verdict::fails; });
}

bool AssumptionReport::any_not_checked() const {
  return std::any_of(assumptions.begin(), assumptions.end(),
                     [](const AssumptionResult& r) { return r.verdict == Verdict::not_checked; });
}

namespace {

std::string fmt_row(std::span<const double> row) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < row.size(); ++i) os << (i ? ", " : "") << row[i];
  os << ']';
  return os.str();
}

std::string fmt_set(const std::vector<std::size_t>& u) {
  std::ostringstream os;
  os << '{';
  for (std::size_t i = 0; i < u.size(); ++i) os << (i ? "," : "") << u[i];
  os << '}';
  return os.str();
}

std::string fmt_state(const System& sys, std::size_t s) {
  std::ostringstream os;
  const auto c = sys.states().decode(s);
  os << s;
  if (c.size() > 1) {
    os << " (";
    for (std::size_t i = 0; i < c.size(); ++i) os << (i ? "," : "") << c[i];
    os << ')';
  }
  return os.str();
}

std::string fmt_policy(const AugmentedChain& chain, const ReachablePolicy& pol) {
  std::ostringstream os;
  os << '{';
  for (std::size_t k = 0; k < pol.size(); ++k) {
    const auto& d = pol[k];
    const auto& a = chain.feasible_actions(d.node.budget)[d.action];
    os << (k ? "; " : "") << "t=" << d.node.t << " s=" << d.node.state << " b="
       << to_string(Allocation{chain.budgets().decode(d.node.budget)}) << " -> a=" << to_string(Allocation{a});
  }
  os << '}';
  return os.str();
}

Witness dominance_witness(std::string context, std::span<const double> dominant, std::span<const double> dominated,
                          const DominanceResult& d) {
  Witness w;
  w.kind = Witness::Kind::dominance;
  w.dominant.assign(dominant.begin(), dominant.end());
  w.dominated.assign(dominated.begin(), dominated.end());
  w.upper_set = d.upper_set;
  w.larger = d.mass_p;
  w.smaller = d.mass_q;
  std::ostringstream os;
  os << context << ": " << fmt_row(dominant) << " does not dominate " << fmt_row(dominated) << " on upper set "
     << fmt_set(d.upper_set) << " (" << d.mass_p << " < " << d.mass_q << ")";
  w.message = os.str();
  return w;
}

AssumptionResult check_rewards(const System& sys, const PartialOrder& joint) {
  AssumptionResult res{Verdict::holds, std::nullopt, {}};
  for (std::size_t i = 0; i < sys.n_subprocesses(); ++i) {
    const auto& sub = sys.sub(i);
    for (const auto& [lo, hi] : sys.state_order(i).strict_pairs()) {
      for (std::size_t a = 0; a < sub.n_actions(); ++a) {
        if (sub.reward(hi, a) < sub.reward(lo, a)) {
          Witness w;
          w.kind = Witness::Kind::local_reward;
          w.subprocess = static_cast<int>(i);
          w.action = static_cast<int>(a);
          w.lower = lo;
          w.upper = hi;
          w.larger = sub.reward(hi, a);
          w.smaller = sub.reward(lo, a);
          std::ostringstream os;
          os << "subprocess " << i << ": r(" << hi << "," << a << ") = " << w.larger << " < r(" << lo << "," << a
             << ") = " << w.smaller << " although " << lo << " <= " << hi;
          w.message = os.str();
          return {Verdict::fails, std::move(w), {}};
        }
      }
    }
    for (std::size_t s = 0; s < sub.n_states(); ++s) {
      for (std::size_t a = 0; a + 1 < sub.n_actions(); ++a) {
        for (std::size_t a2 = a + 1; a2 < sub.n_actions(); ++a2) {
          if (sub.reward(s, a2) < sub.reward(s, a)) {
            Witness w;
            w.kind = Witness::Kind::local_reward;
            w.subprocess = static_cast<int>(i);
            w.state = static_cast<int>(s);
            w.lower = a;
            w.upper = a2;
            w.larger = sub.reward(s, a2);
            w.smaller = sub.reward(s, a);
            std::ostringstream os;
            os << "subprocess " << i << ": r(" << s << "," << a2 << ") = " << w.larger << " < r(" << s << "," << a
               << ") = " << w.smaller << " although action " << a << " < " << a2;
            w.message = os.str();
            return {Verdict::fails, std::move(w), {}};
          }
        }
      }
    }
  }
  if (sys.has_global_reward()) {
    const auto pairs = joint.strict_pairs();
    for (const auto& a_g : sys.allocations()) {
      for (const auto& [lo, hi] : pairs) {
        const double rl = sys.global_reward(lo, a_g);
        const double rh = sys.global_reward(hi, a_g);
        if (rh < rl) {
          Witness w;
          w.kind = Witness::Kind::global_reward;
          w.allocation = a_g;
          w.lower = lo;
          w.upper = hi;
          w.larger = rh;
          w.smaller = rl;
          std::ostringstream os;
          os << "I_g(" << fmt_state(sys, hi) << ", " << to_string(a_g) << ") = " << rh << " < I_g("
             << fmt_state(sys, lo) << ", " << to_string(a_g) << ") = " << rl;
          w.message = os.str();
          return {Verdict::fails, std::move(w), {}};
        }
      }
    }
  }
  return res;
}

// Terminal distribution and epoch-local reward of a reachable joint policy.
std::pair<std::vector<double>, double> propagate(const AugmentedChain& chain, std::size_t start,
                                                 const ReachablePolicy& pol, double gamma) {
  const std::size_t n = chain.states().size();
  const std::size_t nb = chain.budgets().size();
  std::vector<double> dist(n * nb, 0.0), next(n * nb);
  dist[start * nb + chain.full_budget()] = 1.0;
  double reward = 0.0, disc = 1.0;
  for (int t = 0; t < chain.horizon(); ++t) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t s = 0; s < n; ++s) {
      for (std::size_t b = 0; b < nb; ++b) {
        const double mass = dist[s * nb + b];
        if (mass == 0.0) continue;
        const NodeDecision* d = find_decision(pol, AugmentedNode{t, s, b});
        if (d == nullptr) throw std::logic_error("reachable policy misses a reachable node");
        const auto& a = chain.feasible_actions(b)[d->action];
        reward += mass * disc * chain.reward(s, a);
        const std::size_t rest = chain.spend(b, a);
        chain.for_each_successor(s, a, [&](std::size_t to, double p) { next[to * nb + rest] += mass * p; });
      }
    }
    dist.swap(next);
    disc *= gamma;
  }
  std::vector<double> terminal(n, 0.0);
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t b = 0; b < nb; ++b) terminal[s] += dist[s * nb + b];
  return {terminal, reward};
}

}  // namespace

AssumptionReport check_assumptions(const System& sys, const AnalysisCaps& caps) {
  AssumptionReport report;
  const PartialOrder joint = joint_state_order(sys);

  // A1: orders are validated at construction; actions use the index order.
  report.assumptions[0] = {Verdict::holds, std::nullopt, "state orders valid; actions ordered by index"};

  report.assumptions[1] = check_rewards(sys, joint);

  const auto joint_sets = enumerate_upper_sets(joint, caps.upper_sets);
  std::vector<std::optional<UpperSets>> local_sets;
  for (std::size_t i = 0; i < sys.n_subprocesses(); ++i)
    local_sets.push_back(enumerate_upper_sets(sys.state_order(i), caps.upper_sets));

  // A5: per-action local kernels are stochastically monotone.
  {
    AssumptionResult res{Verdict::holds, std::nullopt, {}};
    for (std::size_t i = 0; i < sys.n_subprocesses() && res.verdict != Verdict::fails; ++i) {
      if (!local_sets[i]) {
        res = {Verdict::not_checked, std::nullopt, "upper-set cap exceeded for subprocess " + std::to_string(i)};
        continue;
      }
      const auto& sub = sys.sub(i);
      for (std::size_t a = 0; a < sub.n_actions() && res.verdict != Verdict::fails; ++a) {
        for (const auto& [lo, hi] : sys.state_order(i).strict_pairs()) {
          const auto d = stochastically_dominates(sub.transition[a].row(hi), sub.transition[a].row(lo), *local_sets[i]);
          if (d.verdict == Verdict::fails) {
            std::ostringstream ctx;
            ctx << "subprocess " << i << " action " << a << ", states " << lo << " <= " << hi;
            Witness w = dominance_witness(ctx.str(), sub.transition[a].row(hi), sub.transition[a].row(lo), d);
            w.subprocess = static_cast<int>(i);
            w.action = static_cast<int>(a);
            w.lower = lo;
            w.upper = hi;
            res = {Verdict::fails, std::move(w), {}};
            break;
          }
        }
      }
    }
    report.assumptions[4] = std::move(res);
  }

  // Myopic epoch kernels, shared by A3 and A4.
  std::vector<EpochKernel> myopic;
  std::vector<std::vector<LocalPolicy>> myopic_locals;
  for (const auto& a_g : sys.allocations()) {
    myopic_locals.push_back(t_myopic_policy_vector(sys, a_g));
    myopic.push_back(epoch_kernel(sys, a_g, std::span<const LocalPolicy>(myopic_locals.back())));
  }

  // A3: myopic epoch kernel is stochastically monotone in the joint state.
  if (!joint_sets) {
    report.assumptions[2] = {Verdict::not_checked, std::nullopt, "upper-set cap exceeded for the joint order"};
    report.assumptions[3] = {Verdict::not_checked, std::nullopt, "upper-set cap exceeded for the joint order"};
    return report;
  }
  {
    AssumptionResult res{Verdict::holds, std::nullopt, {}};
    const auto pairs = joint.strict_pairs();
    for (std::size_t j = 0; j < sys.allocations().size() && res.verdict == Verdict::holds; ++j) {
      const Matrix& k = myopic[j].transition;
      for (const auto& [lo, hi] : pairs) {
        const auto d = stochastically_dominates(k.row(hi), k.row(lo), *joint_sets);
        if (d.verdict == Verdict::fails) {
          std::ostringstream ctx;
          ctx << "allocation " << to_string(sys.allocations()[j]) << ", states " << fmt_state(sys, lo)
              << " <= " << fmt_state(sys, hi) << ", T-myopic epoch rows";
          Witness w = dominance_witness(ctx.str(), k.row(hi), k.row(lo), d);
          w.allocation = sys.allocations()[j];
          w.lower = lo;
          w.upper = hi;
          res = {Verdict::fails, std::move(w), {}};
          break;
        }
      }
    }
    report.assumptions[2] = std::move(res);
  }

  // A4: the myopic epoch row dominates the row of every alternative policy.
  {
    AssumptionResult res{Verdict::holds, std::nullopt, {}};
    bool truncated = false;
    std::vector<const SubProcessModel*> subs;
    for (std::size_t i = 0; i < sys.n_subprocesses(); ++i) subs.push_back(&sys.sub(i));
    for (std::size_t j = 0; j < sys.allocations().size() && res.verdict != Verdict::fails; ++j) {
      const Allocation& a_g = sys.allocations()[j];
      const AugmentedChain chain(subs, a_g.per_subprocess, sys.horizon());
      const Matrix& k = myopic[j].transition;
      for (std::size_t s = 0; s < sys.n_joint_states() && res.verdict != Verdict::fails; ++s) {
        const double myopic_reward = myopic[j].reward[s] - sys.global_reward(s, a_g);
        const auto row = k.row(s);
        bool tie_noted = false;
        const auto stats = for_each_reachable_policy(
            chain, AugmentedNode{0, s, chain.full_budget()}, caps.policies, [&](const ReachablePolicy& pol) {
              const auto [terminal, reward] = propagate(chain, s, pol, sys.gamma());
              const auto d = stochastically_dominates(row, terminal, *joint_sets);
              if (d.verdict == Verdict::fails) {
                std::ostringstream ctx;
                ctx << "allocation " << to_string(a_g) << ", state " << fmt_state(sys, s) << ", alternative policy "
                    << fmt_policy(chain, pol) << ": T-myopic row";
                Witness w = dominance_witness(ctx.str(), row, terminal, d);
                w.allocation = a_g;
                w.lower = s;
                w.upper = s;
                w.alternative = pol;
                res = {Verdict::fails, std::move(w), {}};
                return false;
              }
              const double scale = std::max(1.0, std::abs(myopic_reward));
              if (!tie_noted && std::abs(reward - myopic_reward) <= 1e-9 * scale &&
                  sup_norm_diff(terminal, row) > kDominanceTolerance) {
                tie_noted = true;
                report.notes.push_back("allocation " + to_string(a_g) + ", state " + fmt_state(sys, s) +
                                       ": another policy ties the T-myopic epoch reward with a different kernel row");
              }
              return true;
            });
        truncated = truncated || stats.truncated;
      }
    }
    if (res.verdict == Verdict::holds && truncated)
      res = {Verdict::not_checked, std::nullopt,
             "alternative policy count exceeded the cap of " + std::to_string(caps.policies)};
    report.assumptions[3] = std::move(res);
  }
  return report;
}

MonotoneCheck check_value_monotone(std::span<const double> v, const PartialOrder& order) {
  if (v.size() != order.size()) throw std::invalid_argument("value vector and order differ in size");
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j)
      if (i != j && order.leq(i, j) && v[i] > v[j] + kMonotoneTolerance) return {false, std::make_pair(i, j)};
  return {true, std::nullopt};
}

bool ComparisonReport::all_myopic() const {
  return std::all_of(myopic.begin(), myopic.end(), [](const MyopicCheck& m) { return m.myopic; });
}

ComparisonReport compare_frameworks(const System& sys, const SolveOptions& options) {
  ComparisonReport rep;
  rep.copt = value_iteration(sys, Framework::copt, options);
  rep.fopt = value_iteration(sys, Framework::fopt, options);

  LocalPlanMap myopic;
  for (const auto& a_g : rep.copt.global_policy.allocation)
    if (!myopic.count(a_g)) myopic.emplace(a_g, t_myopic_policy_vector(sys, a_g));
  rep.lower_envelope = evaluate_policy_exact(sys, rep.copt.global_policy, myopic);

  const std::size_t n = sys.n_joint_states();
  rep.gap.resize(n);
  rep.sup_gap = 0.0;
  rep.sandwich_violation = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    rep.gap[s] = rep.copt.value[s] - rep.fopt.value[s];
    rep.sup_gap = std::max(rep.sup_gap, std::abs(rep.gap[s]));
    rep.sandwich_violation = std::max({rep.sandwich_violation, rep.lower_envelope[s] - rep.fopt.value[s],
                                       rep.fopt.value[s] - rep.copt.value[s]});
  }
  rep.tolerance = 10.0 * options.epsilon;
  rep.equivalent = rep.sup_gap <= rep.tolerance;
  rep.sandwich_holds = rep.sandwich_violation <= kSandwichTolerance;

  std::map<Allocation, EpochKernel> copt_k, myopic_k;
  for (std::size_t s = 0; s < n; ++s) {
    const Allocation& a_g = rep.copt.global_policy(s);
    if (!copt_k.count(a_g)) {
      copt_k.emplace(a_g, epoch_kernel(sys, a_g, rep.copt.local_policies.at(a_g)));
      myopic_k.emplace(a_g, epoch_kernel(sys, a_g, myopic.at(a_g)));
    }
    MyopicCheck m;
    m.state = s;
    m.allocation = a_g;
    m.copt_epoch_reward = copt_k.at(a_g).reward[s];
    m.myopic_epoch_reward = myopic_k.at(a_g).reward[s];
    m.myopic = m.copt_epoch_reward >= m.myopic_epoch_reward - 1e-9 * std::max(1.0, std::abs(m.myopic_epoch_reward));
    rep.myopic.push_back(std::move(m));
  }
  return rep;
}

std::optional<std::pair<std::pair<std::size_t, std::size_t>, Allocation>> find_epoch_reward_violation(
    const System& sys) {
  const PartialOrder joint = joint_state_order(sys);
  const auto pairs = joint.strict_pairs();
  const FederalOperator op(sys);
  for (std::size_t j = 0; j < sys.allocations().size(); ++j) {
    const auto& r = op.epoch_reward(j);
    for (const auto& [lo, hi] : pairs)
      if (r[hi] < r[lo] - kMonotoneTolerance) return std::make_pair(std::make_pair(lo, hi), sys.allocations()[j]);
  }
  return std::nullopt;
}

}  // namespace hmdp
