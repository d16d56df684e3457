#include "hmdp_cli/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "hmdp/io.hpp"

#ifndef HMDP_INSTANCE_DIR
#define HMDP_INSTANCE_DIR "instances"
#endif

namespace hmdp::cli {

namespace {

std::size_t env_cap(const char* name, std::size_t fallback) {
  const char* raw = std::getenv(name);
  if (raw == nullptr || *raw == '\0') return fallback;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(raw, &end, 10);
  if (end == raw || *end != '\0' || v == 0) throw std::invalid_argument(std::string(name) + " must be a positive integer");
  return static_cast<std::size_t>(v);
}

std::string vec_str(std::span<const double> v, int precision = 4) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << '[';
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << ']';
  return os.str();
}

std::string stem(const RunConfig& c) { return c.instance.stem().string(); }

io::RunMetadata meta(const RunConfig& c) { return {c.epsilon, c.max_iter, c.seed}; }

std::filesystem::path artifact(const RunConfig& c, const std::string& suffix) {
  return c.out_dir / (stem(c) + suffix);
}

System load(const std::filesystem::path& path) { return System(io::load_instance(path)); }

/// Actions at every augmented node reachable from (0, s, full budget) under
/// `a`, compared against `b`.
bool same_local_behaviour(const System& sys, std::size_t s, const Allocation& a_g, const LocalPlan& a,
                          const LocalPlan& b) {
  const JointLocalPolicy pa = lift(sys, a_g, a);
  const JointLocalPolicy pb = lift(sys, a_g, b);
  std::vector<const SubProcessModel*> subs;
  for (std::size_t i = 0; i < sys.n_subprocesses(); ++i) subs.push_back(&sys.sub(i));
  const AugmentedChain chain(subs, a_g.per_subprocess, sys.horizon());
  std::set<AugmentedNode> frontier{AugmentedNode{0, s, chain.full_budget()}};
  for (int t = 0; t < sys.horizon(); ++t) {
    std::set<AugmentedNode> next;
    for (const auto& node : frontier) {
      const auto x = pa.action(t, node.state, node.budget);
      const auto y = pb.action(t, node.state, node.budget);
      if (!std::equal(x.begin(), x.end(), y.begin(), y.end())) return false;
      const std::size_t rest = chain.spend(node.budget, x);
      chain.for_each_successor(node.state, x, [&](std::size_t to, double) { next.insert({t + 1, to, rest}); });
    }
    frontier = std::move(next);
  }
  return true;
}

void print_values(std::ostream& out, const System& sys, const SolveResult& r) {
  out << to_string(r.framework) << ": " << (r.converged ? "converged" : "NOT converged") << " after "
      << r.iterations << " iterations, residual " << std::scientific << std::setprecision(3) << r.residual
      << std::defaultfloat << "\n";
  for (std::size_t s = 0; s < sys.n_joint_states(); ++s) {
    out << "  state " << s << " " << to_string(Allocation{sys.decode(s).components}) << "  V = " << std::fixed
        << std::setprecision(6) << r.value[s] << std::defaultfloat << "  allocation " << to_string(r.global_policy(s))
        << "\n";
  }
}

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const io::ParseError& e) {
    err << "error: " << e.what() << "\n";
  } catch (const ValidationError& e) {
    err << "error: invalid instance\n";
    for (const auto& issue : e.issues()) err << "  " << issue << "\n";
  } catch (const CapExceeded& e) {
    err << "error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
  }
  return kInputError;
}

struct CheckLine {
  std::string name;
  bool pass = false;
  std::string detail;
};

bool within(std::span<const double> v, std::initializer_list<double> want, double tol) {
  if (v.size() != want.size()) return false;
  std::size_t i = 0;
  for (double w : want)
    if (std::abs(v[i++] - w) > tol) return false;
  return true;
}

}  // namespace

Caps Caps::from_environment() {
  Caps c;
  c.joint = env_cap("HMDP_JOINT_CAP", c.joint);
  c.upper_sets = env_cap("HMDP_UPPER_SET_CAP", c.upper_sets);
  c.policies = env_cap("HMDP_POLICY_CAP", c.policies);
  c.oracle_pairs = env_cap("HMDP_ORACLE_PAIR_CAP", c.oracle_pairs);
  return c;
}

SolveOptions RunConfig::solve_options() const {
  SolveOptions o;
  o.epsilon = epsilon;
  o.max_iter = max_iter;
  o.joint_cap = caps.joint;
  return o;
}

std::filesystem::path default_data_dir() { return HMDP_INSTANCE_DIR; }

int cmd_solve(const RunConfig& c, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const System sys = load(c.instance);
    std::vector<Framework> which;
    if (c.framework == "copt" || c.framework == "both") which.push_back(Framework::copt);
    if (c.framework == "fopt" || c.framework == "both") which.push_back(Framework::fopt);
    if (which.empty()) throw std::invalid_argument("unknown framework \"" + c.framework + "\"");

    bool converged = true, agree = true;
    for (Framework f : which) {
      const SolveResult r = value_iteration(sys, f, c.solve_options());
      converged = converged && r.converged;
      print_values(out, sys, r);
      const std::string tag = "." + to_string(f);
      if (c.json) io::write_file(artifact(c, tag + ".json"), io::solve_result_json(sys, r, meta(c)));
      if (c.csv) io::write_file(artifact(c, tag + ".values.csv"), io::value_csv(sys, r));
      if (c.oracle) {
        oracle::EnumerationBudget budget;
        budget.pairs = c.caps.oracle_pairs;
        budget.local_policies = c.caps.policies;
        const auto ref = f == Framework::copt ? oracle::brute_force_copt(sys, budget)
                                              : oracle::brute_force_fopt(sys, budget);
        const auto ag = oracle::compare_with_oracle(sys, r, ref);
        out << "  oracle: " << (ag ? "agrees" : "DISAGREES") << " (max value diff " << std::scientific
            << std::setprecision(2) << ag.max_value_diff << std::defaultfloat << ", " << ref.candidates
            << " candidates)" << (ag.detail.empty() ? "" : "; " + ag.detail) << "\n";
        agree = agree && static_cast<bool>(ag);
      }
    }
    if (!converged) return static_cast<int>(kNotConverged);
    return agree ? static_cast<int>(kOk) : static_cast<int>(kNegative);
  });
}

int cmd_compare(const RunConfig& c, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const System sys = load(c.instance);
    const ComparisonReport rep = compare_frameworks(sys, c.solve_options());
    if (c.json) io::write_file(artifact(c, ".compare.json"), io::comparison_json(sys, rep, meta(c)));
    if (c.csv) io::write_file(artifact(c, ".compare.csv"), io::comparison_csv(sys, rep));
    out << "V_copt = " << vec_str(rep.copt.value) << "\n"
        << "V_fopt = " << vec_str(rep.fopt.value) << "\n"
        << "lower  = " << vec_str(rep.lower_envelope) << "\n"
        << "gap    = " << vec_str(rep.gap) << "\n"
        << "sandwich " << (rep.sandwich_holds ? "holds" : "VIOLATED") << ", COpt locals "
        << (rep.all_myopic() ? "T-myopic in every state" : "not T-myopic in some state") << "\n"
        << (rep.equivalent ? "equivalent" : "not equivalent") << " (sup gap " << std::scientific
        << std::setprecision(3) << rep.sup_gap << ", tolerance " << rep.tolerance << std::defaultfloat << ")\n";
    if (!rep.copt.converged || !rep.fopt.converged) return static_cast<int>(kNotConverged);
    return rep.equivalent ? static_cast<int>(kOk) : static_cast<int>(kNegative);
  });
}

int cmd_check(const RunConfig& c, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const System sys = load(c.instance);
    const AssumptionReport rep = check_assumptions(sys, AnalysisCaps{c.caps.upper_sets, c.caps.policies});
    if (c.json) io::write_file(artifact(c, ".check.json"), io::assumption_report_json(sys, rep));
    for (int k = 1; k <= 5; ++k) {
      const auto& a = rep[k];
      out << "A" << k << ": " << to_string(a.verdict);
      if (!a.note.empty()) out << " (" << a.note << ")";
      out << "\n";
      if (a.witness) out << "    witness: " << io::describe(*a.witness) << "\n";
    }
    for (const auto& note : rep.notes) out << "note: " << note << "\n";
    if (rep.any_fails()) return static_cast<int>(kNegative);
    if (rep.any_not_checked()) return static_cast<int>(kNotChecked);
    return static_cast<int>(kOk);
  });
}

int cmd_paper_examples(const RunConfig& c, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto dir = c.data_dir.empty() ? default_data_dir() : c.data_dir;
    const System ex1 = load(dir / "example1.json");
    const System ex2 = load(dir / "example2.json");
    const SolveOptions opts = c.solve_options();
    std::vector<CheckLine> lines;

    const auto cmp1 = compare_frameworks(ex1, opts);
    const auto& c1 = cmp1.copt;
    {
      const auto& plan = std::get<JointLocalPolicy>(c1.local_policies.at(c1.global_policy(0)));
      const bool policy = plan.action(0, 0, plan.budgets().size() - 1)[0] == 0 &&
                          plan.action(0, 1, plan.budgets().size() - 1)[0] == 1;
      lines.push_back({"example 1 COpt value and policy", within(c1.value, {74.5, 75.1}, 0.2) && policy,
                       "V = " + vec_str(c1.value) + ", pi(0)=" + std::to_string(plan.action(0, 0, 1)[0]) +
                           " pi(1)=" + std::to_string(plan.action(0, 1, 1)[0])});
    }
    const auto exact = evaluate_policy_exact(ex1, cmp1.fopt.global_policy, cmp1.fopt.local_policies);
    lines.push_back({"example 1 FOpt exact evaluation",
                     within(exact, {66.42, 67.25}, 0.3) && within(exact, {66.3, 67.2}, 0.3),
                     "V = " + vec_str(exact)});
    {
      const auto mc = evaluate_policy_mc(ex1, cmp1.fopt.global_policy, cmp1.fopt.local_policies, c.mc_horizon,
                                         c.mc_episodes, c.seed);
      bool ok = true;
      for (std::size_t s = 0; s < exact.size(); ++s)
        ok = ok && std::abs(mc.mean[s] - exact[s]) <= 3.0 * mc.standard_error[s];
      lines.push_back({"example 1 FOpt Monte Carlo within 3 SE", ok,
                       "mean = " + vec_str(mc.mean) + ", SE = " + vec_str(mc.standard_error)});
    }
    lines.push_back({"example 1 frameworks differ",
                     !cmp1.equivalent && within(cmp1.gap, {8.1919, 7.9901}, 0.1) && !cmp1.myopic[0].myopic,
                     "gap = " + vec_str(cmp1.gap)});

    const auto cmp2 = compare_frameworks(ex2, opts);
    lines.push_back({"example 2 values",
                     within(cmp2.copt.value, {89.60, 90.08}, 0.05) && within(cmp2.fopt.value, {89.60, 90.08}, 0.05),
                     "V_C = " + vec_str(cmp2.copt.value) + ", V_F = " + vec_str(cmp2.fopt.value)});
    {
      bool same = cmp2.copt.global_policy.allocation == cmp2.fopt.global_policy.allocation;
      for (std::size_t s = 0; s < ex2.n_joint_states() && same; ++s) {
        const Allocation& a_g = cmp2.copt.global_policy(s);
        same = same_local_behaviour(ex2, s, a_g, cmp2.copt.local_policies.at(a_g), cmp2.fopt.local_policies.at(a_g));
      }
      lines.push_back({"example 2 identical policies, equivalent", same && cmp2.equivalent,
                       cmp2.equivalent ? "equivalent" : "not equivalent"});
    }

    const AnalysisCaps caps{c.caps.upper_sets, c.caps.policies};
    const auto rep2 = check_assumptions(ex2, caps);
    lines.push_back({"example 2 satisfies A1-A5", rep2.sufficient(), rep2.sufficient() ? "all hold" : "some fail"});

    const auto rep1 = check_assumptions(ex1, caps);
    {
      const auto& a4 = rep1[4];
      bool ok = a4.verdict == Verdict::fails && a4.witness.has_value();
      if (ok) {
        const Witness& w = *a4.witness;
        ok = w.lower == 0 && w.upper_set == std::vector<std::size_t>{1} && within(w.dominant, {0.8, 0.2}, 1e-12) &&
             within(w.dominated, {0.2, 0.8}, 1e-12);
      }
      lines.push_back({"example 1 A4 witness", ok, a4.witness ? io::describe(*a4.witness) : to_string(a4.verdict)});
    }

    std::size_t passed = 0;
    for (const auto& l : lines) {
      out << (l.pass ? "PASS  " : "FAIL  ") << l.name << "  (" << l.detail << ")\n";
      passed += l.pass ? 1 : 0;
    }
    out << passed << "/" << lines.size() << " checks passed\n";
    return passed == lines.size() ? static_cast<int>(kOk) : static_cast<int>(kNegative);
  });
}

int cmd_oracle_verify(const RunConfig& c, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const System sys = load(c.instance);
    oracle::EnumerationBudget budget;
    budget.pairs = c.caps.oracle_pairs;
    budget.local_policies = c.caps.policies;
    bool all = true;

    for (std::size_t i = 0; i < sys.n_subprocesses(); ++i) {
      for (int b = 0; b < sys.model().K; ++b) {
        const auto dp = solve_local(sys.sub(i), b, sys.horizon(), sys.gamma());
        const auto bf = oracle::brute_force_local(sys.sub(i), b, sys.horizon(), sys.gamma(), budget);
        const auto ag = oracle::compare_local(dp, bf);
        out << "local  subprocess " << i << " budget " << b << ": " << (ag ? "agrees" : "DISAGREES")
            << (ag.detail.empty() ? "" : " (" + ag.detail + ")") << "\n";
        all = all && static_cast<bool>(ag);
      }
    }
    for (Framework f : {Framework::copt, Framework::fopt}) {
      const auto r = value_iteration(sys, f, c.solve_options());
      const auto ref = f == Framework::copt ? oracle::brute_force_copt(sys, budget) : oracle::brute_force_fopt(sys, budget);
      const auto ag = oracle::compare_with_oracle(sys, r, ref);
      out << to_string(f) << ": " << (ag ? "agrees" : "DISAGREES") << " (max value diff " << std::scientific
          << std::setprecision(2) << ag.max_value_diff << std::defaultfloat << ", " << ref.candidates
          << " candidates, maximum attained by one selection: " << (ref.single_pair_attains ? "yes" : "no") << ")"
          << (ag.detail.empty() ? "" : "; " + ag.detail) << "\n";
      all = all && static_cast<bool>(ag) && ref.single_pair_attains;
    }
    return all ? static_cast<int>(kOk) : static_cast<int>(kNegative);
  });
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-timescale hierarchical MDP solver"};
  app.require_subcommand(1);
  RunConfig c;
  try {
    c.caps = Caps::from_environment();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
  std::vector<std::string> formats{"json", "csv"};

  auto common = [&](CLI::App* sub, bool needs_instance) {
    if (needs_instance) sub->add_option("instance", c.instance, "Instance JSON file")->required();
    sub->add_option("--epsilon", c.epsilon, "Value-iteration accuracy")->check(CLI::PositiveNumber);
    sub->add_option("--max-iter", c.max_iter, "Iteration limit")->check(CLI::PositiveNumber);
    sub->add_option("--seed", c.seed, "Random seed");
    sub->add_option("--out", c.out_dir, "Output directory");
    sub->add_option("--format", formats, "Artifact formats (json, csv)")
        ->delimiter(',')
        ->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--joint-cap", c.caps.joint, "Joint augmented state cap");
    sub->add_option("--upper-set-cap", c.caps.upper_sets, "Upper-set enumeration cap");
    sub->add_option("--policy-cap", c.caps.policies, "Reachable policy enumeration cap");
    sub->add_option("--oracle-pair-cap", c.caps.oracle_pairs, "Oracle global selection cap");
  };

  auto* solve = app.add_subcommand("solve", "Value iteration for COpt and/or FOpt");
  common(solve, true);
  solve->add_option("--framework", c.framework, "copt, fopt or both")->check(CLI::IsMember({"copt", "fopt", "both"}));
  solve->add_flag("--oracle", c.oracle, "Cross-check against the brute-force oracle");

  auto* compare = app.add_subcommand("compare", "Compare COpt and FOpt fixed points");
  common(compare, true);
  auto* check = app.add_subcommand("check", "Check the structural sufficient conditions A1-A5");
  common(check, true);
  auto* paper = app.add_subcommand("paper-examples", "Reproduce the two worked examples");
  common(paper, false);
  paper->add_option("--data-dir", c.data_dir, "Directory holding example1.json and example2.json");
  paper->add_option("--mc-episodes", c.mc_episodes, "Monte Carlo episodes")->check(CLI::Range(2, 100'000'000));
  paper->add_option("--mc-horizon", c.mc_horizon, "Monte Carlo epochs per episode")->check(CLI::PositiveNumber);
  auto* verify = app.add_subcommand("oracle-verify", "Compare solvers with brute-force enumeration");
  common(verify, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, e2;
    const int code = app.exit(e, o, e2);
    out << o.str();
    err << e2.str();
    return code == 0 ? static_cast<int>(kOk) : static_cast<int>(kInputError);
  }
  c.json = std::find(formats.begin(), formats.end(), "json") != formats.end();
  c.csv = std::find(formats.begin(), formats.end(), "csv") != formats.end();

  if (*solve) return cmd_solve(c, out, err);
  if (*compare) return cmd_compare(c, out, err);
  if (*check) return cmd_check(c, out, err);
  if (*paper) return cmd_paper_examples(c, out, err);
  return cmd_oracle_verify(c, out, err);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"hmdp"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace hmdp::cli
