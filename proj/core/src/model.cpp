#include "hmdp/model.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "hmdp/solvers.hpp"

namespace hmdp {

int Allocation::total() const {
  int sum = 0;
  for (int a : per_subprocess) sum += a;
  return sum;
}

bool Allocation::is_zero() const {
  for (int a : per_subprocess)
    if (a != 0) return false;
  return true;
}

std::string to_string(const Allocation& a) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < a.size(); ++i) os << (i ? "," : "") << a[i];
  os << ']';
  return os.str();
}

std::string to_string(BudgetMode mode) { return mode == BudgetMode::at_most ? "at-most" : "exactly"; }

namespace {

std::string join_issues(const std::vector<std::string>& issues) {
  std::string out = "invalid system model:";
  for (const auto& issue : issues) out += "\n  - " + issue;
  return out;
}

void check_subprocess(std::size_t i, const SubProcessModel& sub, bool allow_idle_reward,
                      std::vector<std::string>& issues) {
  const std::string where = "subprocess " + std::to_string(i);
  const std::size_t n = sub.n_states();
  const std::size_t m = sub.n_actions();
  if (n == 0) issues.push_back(where + ": no states");
  if (m == 0) issues.push_back(where + ": no actions");
  if (sub.transition.size() != m) {
    issues.push_back(where + ": " + std::to_string(sub.transition.size()) + " transition matrices for " +
                     std::to_string(m) + " actions");
    return;
  }
  for (std::size_t a = 0; a < m; ++a) {
    const Matrix& p = sub.transition[a];
    if (p.rows() != n || p.cols() != n) {
      issues.push_back(where + " action " + std::to_string(a) + ": transition matrix is " +
                       std::to_string(p.rows()) + "x" + std::to_string(p.cols()) + ", expected " +
                       std::to_string(n) + "x" + std::to_string(n));
      continue;
    }
    for (std::size_t s = 0; s < n; ++s) {
      double sum = 0.0;
      for (std::size_t t = 0; t < n; ++t) {
        const double x = p(s, t);
        if (!(x >= 0.0 && x <= 1.0)) {
          std::ostringstream os;
          os << where << " action " << a << " row " << s << ": probability " << x << " outside [0,1]";
          issues.push_back(os.str());
        }
        sum += x;
      }
      if (!(std::abs(sum - 1.0) <= kStochasticTolerance)) {
        std::ostringstream os;
        os << where << " action " << a << " row " << s << ": row sum " << sum;
        issues.push_back(os.str());
      }
    }
  }
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t a = 0; a < m; ++a) {
      const double r = sub.reward(s, a);
      if (!std::isfinite(r) || r < 0.0) {
        std::ostringstream os;
        os << where << ": reward(" << s << "," << a << ") = " << r << " is not a non-negative real";
        issues.push_back(os.str());
      }
    }
    if (m > 0 && !allow_idle_reward && sub.reward(s, 0) != 0.0) {
      std::ostringstream os;
      os << where << ": r(" << s << ",0) = " << sub.reward(s, 0) << " but idle action must earn 0";
      issues.push_back(os.str());
    }
  }
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> issues)
    : std::invalid_argument(join_issues(issues)), issues_(std::move(issues)) {}

std::vector<std::string> validation_issues(const SystemModel& model) {
  std::vector<std::string> issues;
  const std::size_t n_sub = model.subprocesses.size();
  if (n_sub == 0) issues.emplace_back("system has no subprocesses (N = 0)");
  if (model.T < 1) issues.push_back("T = " + std::to_string(model.T) + " must be at least 1");
  if (model.K < 1) issues.push_back("K = " + std::to_string(model.K) + " must be at least 1");
  if (model.B < 0) issues.push_back("B = " + std::to_string(model.B) + " must be non-negative");
  auto check_discount = [&](const char* name, double x) {
    if (!(x > 0.0 && x < 1.0)) {
      std::ostringstream os;
      os << "discount " << name << " = " << x << " outside (0,1)";
      issues.push_back(os.str());
    }
  };
  check_discount("beta", model.beta);
  check_discount("gamma", model.gamma);

  if (n_sub > 0 && model.K >= 1) {
    const long long cap = static_cast<long long>(n_sub) * (model.K - 1);
    if (model.budget_mode == BudgetMode::at_most && !(model.B < cap)) {
      issues.push_back("B < N(K-1) violated: B = " + std::to_string(model.B) + ", N(K-1) = " + std::to_string(cap));
    }
    if (model.budget_mode == BudgetMode::exactly && !(model.B <= cap)) {
      issues.push_back("B <= N(K-1) violated under an equality budget: B = " + std::to_string(model.B) +
                       ", N(K-1) = " + std::to_string(cap));
    }
  }

  bool shapes_ok = n_sub > 0;
  for (std::size_t i = 0; i < n_sub; ++i) {
    check_subprocess(i, model.subprocesses[i], model.allow_idle_reward, issues);
    if (model.subprocesses[i].n_states() == 0) shapes_ok = false;
  }

  std::size_t joint = 1;
  for (const auto& sub : model.subprocesses) {
    if (sub.n_states() == 0) break;
    if (joint > kMaxJointStates / sub.n_states()) {
      issues.push_back("joint state space exceeds " + std::to_string(kMaxJointStates) + " states");
      shapes_ok = false;
      break;
    }
    joint *= sub.n_states();
  }

  if (!model.state_order.empty()) {
    if (model.state_order.size() != n_sub) {
      issues.push_back("state_order lists " + std::to_string(model.state_order.size()) + " orders for " +
                       std::to_string(n_sub) + " subprocesses");
    } else {
      for (std::size_t i = 0; i < n_sub; ++i)
        if (model.state_order[i].size() != model.subprocesses[i].n_states())
          issues.push_back("state_order " + std::to_string(i) + " is over " +
                           std::to_string(model.state_order[i].size()) + " states, subprocess has " +
                           std::to_string(model.subprocesses[i].n_states()));
    }
  }

  if (shapes_ok && model.K >= 1 && !model.global_reward.empty()) {
    std::size_t codes = 1;
    bool overflow = false;
    for (std::size_t i = 0; i < n_sub; ++i) {
      if (codes > kMaxJointStates / static_cast<std::size_t>(model.K)) overflow = true;
      codes *= static_cast<std::size_t>(model.K);
    }
    if (overflow) {
      issues.emplace_back("global_reward table would exceed the enumerable size");
    } else if (model.global_reward.rows() != joint || model.global_reward.cols() != codes) {
      issues.push_back("global_reward is " + std::to_string(model.global_reward.rows()) + "x" +
                       std::to_string(model.global_reward.cols()) + ", expected " + std::to_string(joint) + "x" +
                       std::to_string(codes));
    } else {
      for (std::size_t s = 0; s < joint; ++s) {
        for (std::size_t c = 0; c < codes; ++c)
          if (!std::isfinite(model.global_reward(s, c)))
            issues.push_back("global_reward(" + std::to_string(s) + "," + std::to_string(c) + ") is not finite");
        if (model.global_reward(s, 0) != 0.0)
          issues.push_back("I_g(" + std::to_string(s) + ", 0) must be 0 for the all-zero allocation");
      }
    }
  }
  return issues;
}

System::System(SystemModel model) : model_(std::move(model)) {
  auto issues = validation_issues(model_);
  if (!issues.empty()) throw ValidationError(std::move(issues));

  std::vector<std::size_t> radices;
  for (const auto& sub : model_.subprocesses) radices.push_back(sub.n_states());
  states_ = MixedRadix(radices);
  allocation_codes_ = MixedRadix(std::vector<std::size_t>(n_subprocesses(), static_cast<std::size_t>(model_.K)));
  allocations_ = enumerate_allocations(model_);
  if (allocations_.empty()) throw ValidationError({"no feasible allocation exists"});

  if (model_.state_order.empty()) {
    for (const auto& sub : model_.subprocesses) orders_.push_back(PartialOrder::index_order(sub.n_states()));
  } else {
    orders_ = model_.state_order;
  }
}

JointState System::decode(std::size_t joint_index) const { return JointState{states_.decode(joint_index)}; }

std::size_t System::encode(const JointState& s) const { return states_.encode(s.components); }

std::size_t System::allocation_code(const Allocation& a) const { return allocation_codes_.encode(a.per_subprocess); }

bool System::is_feasible(const Allocation& a) const {
  if (a.size() != n_subprocesses()) return false;
  for (int x : a.per_subprocess)
    if (x < 0 || x >= model_.K) return false;
  return model_.budget_mode == BudgetMode::at_most ? a.total() <= model_.B : a.total() == model_.B;
}

double System::global_reward(std::size_t joint_index, const Allocation& a) const {
  if (model_.global_reward.empty()) return 0.0;
  return model_.global_reward(joint_index, allocation_code(a));
}

bool System::state_leq(std::size_t s, std::size_t t) const {
  for (std::size_t i = 0; i < orders_.size(); ++i)
    if (!orders_[i].leq(static_cast<std::size_t>(states_.digit(s, i)), static_cast<std::size_t>(states_.digit(t, i))))
      return false;
  return true;
}

}  // namespace hmdp
