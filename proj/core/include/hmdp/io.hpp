#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "hmdp/analysis.hpp"
#include "hmdp/model.hpp"
#include "hmdp/solvers.hpp"

namespace hmdp::io {

/// Malformed instance document. what() names the offending field as a JSON
/// pointer, or the line and column of a syntax error.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

SystemModel parse_instance(std::string_view json_text);
SystemModel load_instance(const std::filesystem::path& path);

std::string serialize_instance(const SystemModel& model);

struct RunMetadata {
  double epsilon = 0.0;
  int max_iter = 0;
  std::uint64_t seed = 0;
};

std::string solve_result_json(const System& system, const SolveResult& result, const RunMetadata& meta);
std::string value_csv(const System& system, const SolveResult& result);

std::string assumption_report_json(const System& system, const AssumptionReport& report);

std::string comparison_json(const System& system, const ComparisonReport& report, const RunMetadata& meta);
/// Columns: state_index, components, V_copt, V_fopt, lower_envelope, gap.
std::string comparison_csv(const System& system, const ComparisonReport& report);

std::string describe(const Witness& w);

void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace hmdp::io
