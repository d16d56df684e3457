#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "hmdp/analysis.hpp"
#include "hmdp/oracle.hpp"
#include "hmdp/solvers.hpp"

namespace hmdp::cli {

enum ExitCode : int {
  kOk = 0,
  kInputError = 1,
  kNotConverged = 2,
  kNegative = 3,     // not equivalent / assumption fails / oracle disagrees
  kNotChecked = 4,
};

struct Caps {
  std::size_t joint = kDefaultJointCap;
  std::size_t upper_sets = kDefaultUpperSetCap;
  std::size_t policies = kDefaultPolicyCap;
  std::size_t oracle_pairs = oracle::EnumerationBudget{}.pairs;

  /// Defaults overridden by HMDP_JOINT_CAP, HMDP_UPPER_SET_CAP,
  /// HMDP_POLICY_CAP and HMDP_ORACLE_PAIR_CAP when set.
  static Caps from_environment();
};

struct RunConfig {
  std::string command;
  std::filesystem::path instance;
  std::string framework = "copt";  // copt | fopt | both
  double epsilon = 1e-8;
  int max_iter = 100'000;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = ".";
  bool json = true;
  bool csv = true;
  bool oracle = false;
  Caps caps;
  std::filesystem::path data_dir;
  int mc_episodes = 100'000;
  int mc_horizon = 2000;

  SolveOptions solve_options() const;
};

int cmd_solve(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_compare(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_check(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_paper_examples(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_oracle_verify(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Parses argv and dispatches. Returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::filesystem::path default_data_dir();

}  // namespace hmdp::cli
