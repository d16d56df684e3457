#include "hmdp/solvers.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace hmdp {

std::string to_string(Framework f) { return f == Framework::copt ? "copt" : "fopt"; }

std::vector<Allocation> enumerate_allocations(const SystemModel& model) {
  const std::size_t n = model.subprocesses.size();
  std::vector<Allocation> out;
  if (model.K < 1) return out;
  std::vector<int> digits(n, 0);
  const std::vector<int> limits(n, model.K - 1);
  do {
    int sum = 0;
    for (int d : digits) sum += d;
    const bool ok = model.budget_mode == BudgetMode::at_most ? sum <= model.B : sum == model.B;
    if (ok) out.push_back(Allocation{digits});
  } while (next_lexicographic(digits, limits));
  return out;
}

double sup_norm_diff(std::span<const double> a, std::span<const double> b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

double stopping_threshold(double epsilon, double beta) { return epsilon * (1.0 - beta) / (2.0 * beta); }

// ---------------------------------------------------------------------------
// Federal operator

FederalOperator::FederalOperator(const System& system) : system_(&system) {
  const std::size_t n_sub = system.n_subprocesses();
  const auto& states = system.states();
  std::map<std::pair<std::size_t, int>, LocalPolicy> policies;
  for (const Allocation& a_g : system.allocations()) {
    Entry e;
    for (std::size_t i = 0; i < n_sub; ++i) {
      const auto key = std::make_pair(i, a_g[i]);
      auto it = policies.find(key);
      if (it == policies.end()) {
        LocalPolicy pol = solve_local(system.sub(i), a_g[i], system.horizon(), system.gamma()).policy;
        cache_.emplace(key, local_epoch(system.sub(i), pol, a_g[i], system.horizon(), system.gamma()));
        it = policies.emplace(key, std::move(pol)).first;
      }
      e.locals.push_back(it->second);
      e.marginals.push_back(&cache_.at(key).marginal);
    }
    e.reward.assign(states.size(), 0.0);
    for (std::size_t s = 0; s < states.size(); ++s) {
      double r = system.global_reward(s, a_g);
      for (std::size_t i = 0; i < n_sub; ++i)
        r += cache_.at({i, a_g[i]}).reward[static_cast<std::size_t>(states.digit(s, i))];
      e.reward[s] = r;
    }
    per_allocation_.push_back(std::move(e));
  }
}

std::vector<double> FederalOperator::expected_next(std::size_t allocation_index, std::span<const double> v) const {
  std::vector<double> out(v.size());
  apply_product_kernel(system_->states(), per_allocation_[allocation_index].marginals, v, out);
  return out;
}

Backup FederalOperator::apply(std::span<const double> v) const {
  const std::size_t n = system_->n_joint_states();
  if (v.size() != n) throw std::invalid_argument("value vector has the wrong length");
  Backup out{ValueFunction(n, -std::numeric_limits<double>::infinity()),
             GlobalPolicy{std::vector<Allocation>(n)}};
  const double beta = system_->beta();
  const auto& allocs = system_->allocations();
  for (std::size_t j = 0; j < allocs.size(); ++j) {
    const auto next = expected_next(j, v);
    const auto& reward = per_allocation_[j].reward;
    for (std::size_t s = 0; s < n; ++s) {
      const double q = reward[s] + beta * next[s];
      if (j == 0 || improves(q, out.value[s])) {
        out.value[s] = q;
        out.policy.allocation[s] = allocs[j];
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Central operator

CentralOperator::CentralOperator(const System& system, std::size_t joint_cap)
    : system_(&system), joint_cap_(joint_cap) {}

CentralOperator::Inner CentralOperator::solve_inner(const Allocation& a_g, std::span<const double> v,
                                                    bool keep_policy) const {
  const System& sys = *system_;
  const std::size_t n_sub = sys.n_subprocesses();
  const auto& states = sys.states();
  const std::size_t n = states.size();
  if (v.size() != n) throw std::invalid_argument("value vector has the wrong length");

  std::vector<std::size_t> radices;
  for (int g : a_g.per_subprocess) radices.push_back(static_cast<std::size_t>(g) + 1);
  const MixedRadix budgets(radices);
  const std::size_t nb = budgets.size();
  if (n > joint_cap_ / nb) {
    std::ostringstream os;
    os << "central inner problem for allocation " << to_string(a_g) << " needs " << n << " x " << nb
       << " augmented joint states, above the cap of " << joint_cap_;
    throw CapExceeded(os.str());
  }

  Inner out;
  if (keep_policy) out.policy = JointLocalPolicy(sys.horizon(), states, a_g);

  // w[b * n + s]: value-to-go from (s, b) including the terminal beta * V.
  std::vector<double> w_next(n * nb), w_cur(n * nb);
  for (std::size_t b = 0; b < nb; ++b)
    for (std::size_t s = 0; s < n; ++s) w_next[b * n + s] = sys.beta() * v[s];

  std::vector<double> discount(static_cast<std::size_t>(sys.horizon()), 1.0);
  for (std::size_t t = 1; t < discount.size(); ++t) discount[t] = discount[t - 1] * sys.gamma();

  std::vector<int> b(n_sub), a(n_sub), limits(n_sub), best_code(n);
  std::vector<std::vector<int>> best_action(n, std::vector<int>(n_sub));
  std::vector<const Matrix*> factors(n_sub);
  std::vector<double> expect(n), best(n);
  std::vector<int> sdig(n_sub);

  for (int t = sys.horizon() - 1; t >= 0; --t) {
    for (std::size_t bc = 0; bc < nb; ++bc) {
      budgets.decode(bc, b);
      for (std::size_t i = 0; i < n_sub; ++i)
        limits[i] = std::min(b[i], static_cast<int>(sys.sub(i).n_actions()) - 1);
      std::fill(a.begin(), a.end(), 0);
      bool first = true;
      do {
        std::vector<int> rest(n_sub);
        for (std::size_t i = 0; i < n_sub; ++i) {
          rest[i] = b[i] - a[i];
          factors[i] = &sys.sub(i).transition[static_cast<std::size_t>(a[i])];
        }
        const std::size_t bnext = budgets.encode(rest);
        apply_product_kernel(states, factors, std::span<const double>(w_next.data() + bnext * n, n), expect);
        for (std::size_t s = 0; s < n; ++s) {
          double r = 0.0;
          for (std::size_t i = 0; i < n_sub; ++i)
            r += sys.sub(i).reward(static_cast<std::size_t>(states.digit(s, i)), static_cast<std::size_t>(a[i]));
          const double q = discount[static_cast<std::size_t>(t)] * r + expect[s];
          if (first || improves(q, best[s])) {
            best[s] = q;
            if (keep_policy) best_action[s] = a;
          }
        }
        first = false;
      } while (next_lexicographic(a, limits));
      for (std::size_t s = 0; s < n; ++s) {
        w_cur[bc * n + s] = best[s];
        if (keep_policy) out.policy.set_action(t, s, bc, best_action[s]);
      }
    }
    w_next.swap(w_cur);
  }

  out.value.resize(n);
  const std::size_t full = nb - 1;
  for (std::size_t s = 0; s < n; ++s) out.value[s] = sys.global_reward(s, a_g) + w_next[full * n + s];
  return out;
}

Backup CentralOperator::apply(std::span<const double> v) const {
  const std::size_t n = system_->n_joint_states();
  Backup out{ValueFunction(n, -std::numeric_limits<double>::infinity()),
             GlobalPolicy{std::vector<Allocation>(n)}};
  const auto& allocs = system_->allocations();
  for (std::size_t j = 0; j < allocs.size(); ++j) {
    const Inner inner = solve_inner(allocs[j], v, false);
    for (std::size_t s = 0; s < n; ++s) {
      if (j == 0 || improves(inner.value[s], out.value[s])) {
        out.value[s] = inner.value[s];
        out.policy.allocation[s] = allocs[j];
      }
    }
  }
  return out;
}

Backup CentralOperator::apply(std::span<const double> v, std::map<Allocation, JointLocalPolicy>& policies) const {
  Backup out = apply(v);
  policies.clear();
  for (const Allocation& a_g : out.policy.allocation) {
    if (policies.count(a_g)) continue;
    policies.emplace(a_g, solve_inner(a_g, v, true).policy);
  }
  return out;
}

Backup bellman_fopt(const System& system, std::span<const double> v) { return FederalOperator(system).apply(v); }

CentralBackup bellman_copt(const System& system, std::span<const double> v, std::size_t joint_cap) {
  CentralBackup out;
  Backup b = CentralOperator(system, joint_cap).apply(v, out.local);
  out.value = std::move(b.value);
  out.policy = std::move(b.policy);
  return out;
}

// ---------------------------------------------------------------------------
// Value iteration

namespace {

template <typename Op>
SolveResult iterate(const System& system, const Op& op, Framework which, const SolveOptions& options) {
  if (!(options.epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  SolveResult res;
  res.framework = which;
  res.epsilon = options.epsilon;
  res.max_iter = options.max_iter;
  res.residual = std::numeric_limits<double>::infinity();
  const double threshold = stopping_threshold(options.epsilon, system.beta());
  ValueFunction v(system.n_joint_states(), 0.0);
  for (int it = 1; it <= options.max_iter; ++it) {
    Backup next = op.apply(v);
    res.residual = sup_norm_diff(next.value, v);
    v = std::move(next.value);
    res.iterations = it;
    if (res.residual <= threshold) {
      res.converged = true;
      break;
    }
  }
  res.value = std::move(v);
  return res;
}

}  // namespace

SolveResult value_iteration(const System& system, Framework which, const SolveOptions& options) {
  if (which == Framework::fopt) {
    const FederalOperator op(system);
    SolveResult res = iterate(system, op, which, options);
    res.global_policy = op.apply(res.value).policy;
    const auto& allocs = system.allocations();
    for (const Allocation& a_g : res.global_policy.allocation) {
      if (res.local_policies.count(a_g)) continue;
      const auto j = static_cast<std::size_t>(std::lower_bound(allocs.begin(), allocs.end(), a_g) - allocs.begin());
      res.local_policies.emplace(a_g, op.locals(j));
    }
    return res;
  }
  const CentralOperator op(system, options.joint_cap);
  SolveResult res = iterate(system, op, which, options);
  std::map<Allocation, JointLocalPolicy> locals;
  res.global_policy = op.apply(res.value, locals).policy;
  for (auto& [a_g, pol] : locals) res.local_policies.emplace(a_g, std::move(pol));
  return res;
}

// ---------------------------------------------------------------------------
// Policy evaluation

namespace {

const LocalPlan& plan_for(const LocalPlanMap& pi, const Allocation& a_g) {
  auto it = pi.find(a_g);
  if (it == pi.end()) throw std::invalid_argument("no local policy given for allocation " + to_string(a_g));
  return it->second;
}

void check_global_policy(const System& system, const GlobalPolicy& phi) {
  if (phi.allocation.size() != system.n_joint_states())
    throw std::invalid_argument("global policy must map every joint state");
  for (const auto& a : phi.allocation)
    if (!system.is_feasible(a)) throw std::invalid_argument("global policy uses infeasible allocation " + to_string(a));
}

}  // namespace

ValueFunction evaluate_policy_exact(const System& system, const GlobalPolicy& phi, const LocalPlanMap& pi) {
  check_global_policy(system, phi);
  const std::size_t n = system.n_joint_states();
  std::map<Allocation, EpochKernel> kernels;
  for (const auto& a_g : phi.allocation)
    if (!kernels.count(a_g)) kernels.emplace(a_g, epoch_kernel(system, a_g, plan_for(pi, a_g)));

  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  Eigen::VectorXd r(static_cast<Eigen::Index>(n));
  for (std::size_t s = 0; s < n; ++s) {
    const EpochKernel& k = kernels.at(phi(s));
    const auto row = static_cast<Eigen::Index>(s);
    for (std::size_t s2 = 0; s2 < n; ++s2) a(row, static_cast<Eigen::Index>(s2)) -= system.beta() * k.transition(s, s2);
    r(row) = k.reward[s];
  }
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  Eigen::VectorXd x = lu.solve(r);
  for (int step = 0; step < 3; ++step) {
    const Eigen::VectorXd residual = r - a * x;
    if (residual.lpNorm<Eigen::Infinity>() <= 1e-12) break;
    x += lu.solve(residual);
  }
  return ValueFunction(x.data(), x.data() + x.size());
}

McEstimate evaluate_policy_mc(const System& system, const GlobalPolicy& phi, const LocalPlanMap& pi, int horizon,
                              int episodes, std::uint64_t seed) {
  check_global_policy(system, phi);
  if (horizon < 1 || episodes < 2) throw std::invalid_argument("Monte Carlo needs horizon >= 1 and episodes >= 2");
  const std::size_t n_sub = system.n_subprocesses();
  const auto& states = system.states();
  const std::size_t n = states.size();

  std::map<Allocation, JointLocalPolicy> joint;
  for (const auto& a_g : phi.allocation)
    if (!joint.count(a_g)) joint.emplace(a_g, lift(system, a_g, plan_for(pi, a_g)));

  // Cumulative transition rows per (subprocess, action, state).
  std::vector<std::vector<Matrix>> cumulative(n_sub);
  for (std::size_t i = 0; i < n_sub; ++i) {
    for (const Matrix& p : system.sub(i).transition) {
      Matrix c = p;
      for (std::size_t r = 0; r < c.rows(); ++r)
        for (std::size_t k = 1; k < c.cols(); ++k) c(r, k) += c(r, k - 1);
      cumulative[i].push_back(std::move(c));
    }
  }
  std::vector<const JointLocalPolicy*> policy_of(n);
  std::vector<double> global_of(n);
  for (std::size_t s = 0; s < n; ++s) {
    policy_of[s] = &joint.at(phi(s));
    global_of[s] = system.global_reward(s, phi(s));
  }

  McEstimate est;
  est.mean.assign(n, 0.0);
  est.standard_error.assign(n, 0.0);
  est.horizon = horizon;
  est.episodes = episodes;
  est.seed = seed;

  std::vector<int> s(n_sub), b(n_sub);
  for (std::size_t start = 0; start < n; ++start) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(start)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double mean = 0.0, m2 = 0.0;
    for (int ep = 0; ep < episodes; ++ep) {
      std::size_t cur = start;
      double total = 0.0, disc = 1.0;
      for (int e = 0; e < horizon; ++e) {
        const JointLocalPolicy& pol = *policy_of[cur];
        double epoch = global_of[cur];
        states.decode(cur, s);
        std::size_t bc = pol.budgets().size() - 1;
        double g = 1.0;
        for (int t = 0; t < system.horizon(); ++t) {
          const auto a = pol.action(t, cur, bc);
          pol.budgets().decode(bc, b);
          double r = 0.0;
          std::size_t next = 0;
          for (std::size_t i = 0; i < n_sub; ++i) {
            const auto ai = static_cast<std::size_t>(a[i]);
            r += system.sub(i).reward(static_cast<std::size_t>(s[i]), ai);
            const auto row = cumulative[i][ai].row(static_cast<std::size_t>(s[i]));
            const double u = unif(rng);
            std::size_t k = 0;
            while (k + 1 < row.size() && u >= row[k]) ++k;
            s[i] = static_cast<int>(k);
            next += k * states.stride(i);
            b[i] -= a[i];
          }
          epoch += g * r;
          g *= system.gamma();
          cur = next;
          bc = pol.budgets().encode(b);
        }
        total += disc * epoch;
        disc *= system.beta();
      }
      const double delta = total - mean;
      mean += delta / (ep + 1);
      m2 += delta * (total - mean);
    }
    est.mean[start] = mean;
    est.standard_error[start] = std::sqrt(m2 / (episodes - 1) / episodes);
  }
  return est;
}

}  // namespace hmdp
