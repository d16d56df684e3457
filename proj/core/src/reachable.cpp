#include "hmdp/reachable.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace hmdp {

AugmentedChain::AugmentedChain(std::vector<const SubProcessModel*> subs, std::vector<int> grant, int horizon)
    : subs_(std::move(subs)), grant_(std::move(grant)), horizon_(horizon) {
  if (subs_.size() != grant_.size()) throw std::invalid_argument("one grant per subprocess is required");
  if (horizon_ < 1) throw std::invalid_argument("horizon must be at least 1");
  std::vector<std::size_t> sr, br;
  for (std::size_t i = 0; i < subs_.size(); ++i) {
    sr.push_back(subs_[i]->n_states());
    if (grant_[i] < 0) throw std::invalid_argument("negative grant");
    br.push_back(static_cast<std::size_t>(grant_[i]) + 1);
  }
  states_ = MixedRadix(sr);
  budgets_ = MixedRadix(br);
  actions_.resize(budgets_.size());
  const std::size_t n = subs_.size();
  std::vector<int> b(n), a(n), limits(n);
  for (std::size_t bc = 0; bc < budgets_.size(); ++bc) {
    budgets_.decode(bc, b);
    for (std::size_t i = 0; i < n; ++i) limits[i] = std::min(b[i], static_cast<int>(subs_[i]->n_actions()) - 1);
    std::fill(a.begin(), a.end(), 0);
    do {
      actions_[bc].push_back(a);
    } while (next_lexicographic(a, limits));
  }
}

std::size_t AugmentedChain::spend(std::size_t budget_code, std::span<const int> action) const {
  std::vector<int> b = budgets_.decode(budget_code);
  for (std::size_t i = 0; i < b.size(); ++i) {
    b[i] -= action[i];
    if (b[i] < 0) throw std::invalid_argument("action exceeds remaining budget");
  }
  return budgets_.encode(b);
}

double AugmentedChain::reward(std::size_t state, std::span<const int> action) const {
  double r = 0.0;
  for (std::size_t i = 0; i < subs_.size(); ++i)
    r += subs_[i]->reward(static_cast<std::size_t>(states_.digit(state, i)), static_cast<std::size_t>(action[i]));
  return r;
}

double AugmentedChain::transition(std::size_t from, std::span<const int> action, std::size_t to) const {
  double p = 1.0;
  for (std::size_t i = 0; i < subs_.size() && p != 0.0; ++i)
    p *= subs_[i]->transition[static_cast<std::size_t>(action[i])](static_cast<std::size_t>(states_.digit(from, i)),
                                                                  static_cast<std::size_t>(states_.digit(to, i)));
  return p;
}

void AugmentedChain::for_each_successor(std::size_t state, std::span<const int> action,
                                        const std::function<void(std::size_t, double)>& f) const {
  for (std::size_t to = 0; to < states_.size(); ++to) {
    const double p = transition(state, action, to);
    if (p > 0.0) f(to, p);
  }
}

namespace {

struct Enumeration {
  const AugmentedChain& chain;
  std::size_t cap;
  const std::function<bool(const ReachablePolicy&)>& visit;
  EnumerationStats stats;
  bool stop = false;
  ReachablePolicy acc;

  void layer(int t, const std::vector<AugmentedNode>& nodes) {
    if (t == chain.horizon() || nodes.empty()) {
      if (stats.visited >= cap) {
        stats.truncated = true;
        stop = true;
        return;
      }
      ++stats.visited;
      if (!visit(acc)) stop = true;
      return;
    }
    const std::size_t k = nodes.size();
    std::vector<int> idx(k, 0), limits(k);
    for (std::size_t j = 0; j < k; ++j)
      limits[j] = static_cast<int>(chain.feasible_actions(nodes[j].budget).size()) - 1;
    do {
      std::set<AugmentedNode> next;
      for (std::size_t j = 0; j < k; ++j) {
        const auto choice = static_cast<std::size_t>(idx[j]);
        acc.push_back(NodeDecision{nodes[j], choice});
        const auto& a = chain.feasible_actions(nodes[j].budget)[choice];
        const std::size_t rest = chain.spend(nodes[j].budget, a);
        chain.for_each_successor(nodes[j].state, a,
                                 [&](std::size_t to, double) { next.insert(AugmentedNode{t + 1, to, rest}); });
      }
      layer(t + 1, std::vector<AugmentedNode>(next.begin(), next.end()));
      acc.resize(acc.size() - k);
      if (stop) return;
    } while (next_lexicographic(idx, limits));
  }
};

}  // namespace

EnumerationStats for_each_reachable_policy(const AugmentedChain& chain, AugmentedNode start, std::size_t cap,
                                           const std::function<bool(const ReachablePolicy&)>& visit) {
  if (start.t < 0 || start.t > chain.horizon()) throw std::invalid_argument("start time outside the epoch");
  Enumeration e{chain, cap, visit, {}, false, {}};
  e.layer(start.t, {start});
  return e.stats;
}

const NodeDecision* find_decision(const ReachablePolicy& policy, const AugmentedNode& node) {
  auto it = std::lower_bound(policy.begin(), policy.end(), node,
                             [](const NodeDecision& d, const AugmentedNode& n) { return d.node < n; });
  if (it == policy.end() || !(it->node == node)) return nullptr;
  return &*it;
}

}  // namespace hmdp
