#include "hmdp/io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"

namespace hmdp::io {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& pointer, const std::string& what) {
  throw ParseError(pointer + ": " + what);
}

const json& require(const json& obj, const std::string& pointer, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(pointer + "/" + key, "missing required field");
  return *it;
}

int get_int(const json& v, const std::string& pointer) {
  if (!v.is_number_integer()) fail(pointer, "expected an integer");
  const auto x = v.get<long long>();
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) fail(pointer, "integer out of range");
  return static_cast<int>(x);
}

double get_double(const json& v, const std::string& pointer) {
  if (!v.is_number()) fail(pointer, "expected a number");
  return v.get<double>();
}

Matrix get_matrix(const json& v, const std::string& pointer) {
  if (!v.is_array()) fail(pointer, "expected an array of rows");
  std::vector<std::vector<double>> rows;
  for (std::size_t r = 0; r < v.size(); ++r) {
    const std::string rp = pointer + "/" + std::to_string(r);
    if (!v[r].is_array()) fail(rp, "expected an array of numbers");
    std::vector<double> row;
    for (std::size_t c = 0; c < v[r].size(); ++c) row.push_back(get_double(v[r][c], rp + "/" + std::to_string(c)));
    if (!rows.empty() && row.size() != rows.front().size()) fail(rp, "ragged matrix row");
    rows.push_back(std::move(row));
  }
  return Matrix::from_rows(rows);
}

PartialOrder get_order(const json& v, std::size_t n, const std::string& pointer) {
  if (v.is_string()) {
    if (v.get<std::string>() != "index") fail(pointer, "unknown order \"" + v.get<std::string>() + "\"");
    return PartialOrder::index_order(n);
  }
  if (!v.is_array()) fail(pointer, "expected \"index\" or a list of [lower, upper] pairs");
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t k = 0; k < v.size(); ++k) {
    const std::string kp = pointer + "/" + std::to_string(k);
    if (!v[k].is_array() || v[k].size() != 2) fail(kp, "expected a [lower, upper] pair");
    const int lo = get_int(v[k][0], kp + "/0");
    const int hi = get_int(v[k][1], kp + "/1");
    if (lo < 0 || hi < 0 || static_cast<std::size_t>(lo) >= n || static_cast<std::size_t>(hi) >= n)
      fail(kp, "state index out of range");
    pairs.emplace_back(static_cast<std::size_t>(lo), static_cast<std::size_t>(hi));
  }
  try {
    return PartialOrder::from_relations(n, pairs);
  } catch (const std::invalid_argument& e) {
    fail(pointer, e.what());
  }
}

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

json components(const System& sys, std::size_t s) { return sys.decode(s).components; }

std::string join_components(const System& sys, std::size_t s) {
  std::string out;
  const auto c = sys.decode(s).components;
  for (std::size_t i = 0; i < c.size(); ++i) out += (i ? ";" : "") + std::to_string(c[i]);
  return out;
}

std::string csv_number(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

json local_plan_json(const System& sys, const Allocation& a_g, const LocalPlan& plan) {
  json out;
  out["allocation"] = a_g.per_subprocess;
  if (const auto* locals = std::get_if<std::vector<LocalPolicy>>(&plan)) {
    out["kind"] = "per-subprocess";
    json subs = json::array();
    for (std::size_t i = 0; i < locals->size(); ++i) {
      const LocalPolicy& p = (*locals)[i];
      // table[t][s][b] = action with b units left
      json table = json::array();
      for (int t = 0; t < p.horizon(); ++t) {
        json per_state = json::array();
        for (std::size_t s = 0; s < p.n_states(); ++s) {
          json per_budget = json::array();
          for (int b = 0; b <= p.budget(); ++b) per_budget.push_back(p.action(t, s, b));
          per_state.push_back(std::move(per_budget));
        }
        table.push_back(std::move(per_state));
      }
      subs.push_back({{"subprocess", i}, {"budget", p.budget()}, {"table", std::move(table)}});
    }
    out["policies"] = std::move(subs);
  } else {
    const auto& p = std::get<JointLocalPolicy>(plan);
    out["kind"] = "joint";
    // table[t][s][budget code] = joint action; budget codes are row-major over 0..a_g[i]
    json table = json::array();
    for (int t = 0; t < p.horizon(); ++t) {
      json per_state = json::array();
      for (std::size_t s = 0; s < sys.n_joint_states(); ++s) {
        json per_budget = json::array();
        for (std::size_t b = 0; b < p.budgets().size(); ++b) {
          const auto a = p.action(t, s, b);
          per_budget.push_back(std::vector<int>(a.begin(), a.end()));
        }
        per_state.push_back(std::move(per_budget));
      }
      table.push_back(std::move(per_state));
    }
    out["table"] = std::move(table);
  }
  return out;
}

json solve_json(const System& sys, const SolveResult& r) {
  json out;
  out["framework"] = to_string(r.framework);
  out["value"] = r.value;
  json phi = json::array();
  for (std::size_t s = 0; s < sys.n_joint_states(); ++s)
    phi.push_back({{"state", s}, {"components", components(sys, s)},
                   {"allocation", r.global_policy(s).per_subprocess}});
  out["global_policy"] = std::move(phi);
  json locals = json::array();
  for (const auto& [a_g, plan] : r.local_policies) locals.push_back(local_plan_json(sys, a_g, plan));
  out["local_policies"] = std::move(locals);
  out["iterations"] = r.iterations;
  out["residual"] = r.residual;
  out["converged"] = r.converged;
  return out;
}

json metadata_json(const RunMetadata& meta) {
  return {{"epsilon", meta.epsilon}, {"max_iter", meta.max_iter}, {"seed", meta.seed}};
}

json witness_json(const System& sys, const Witness& w) {
  json out;
  switch (w.kind) {
    case Witness::Kind::local_reward: out["kind"] = "local-reward"; break;
    case Witness::Kind::global_reward: out["kind"] = "global-reward"; break;
    case Witness::Kind::dominance: out["kind"] = "dominance"; break;
  }
  out["message"] = w.message;
  if (w.subprocess >= 0) out["subprocess"] = w.subprocess;
  if (w.action >= 0) out["action"] = w.action;
  if (w.state >= 0) out["state"] = w.state;
  if (w.allocation) out["allocation"] = w.allocation->per_subprocess;
  out["lower"] = w.lower;
  out["upper"] = w.upper;
  if (w.kind == Witness::Kind::dominance) {
    out["dominant"] = w.dominant;
    out["dominated"] = w.dominated;
    out["upper_set"] = w.upper_set;
    out["mass_dominant"] = w.larger;
    out["mass_dominated"] = w.smaller;
    if (!w.alternative.empty()) {
      json alt = json::array();
      for (const auto& d : w.alternative)
        alt.push_back({{"t", d.node.t}, {"state", d.node.state}, {"budget_code", d.node.budget},
                       {"action_index", d.action}});
      out["alternative"] = std::move(alt);
    }
  } else {
    out["larger"] = w.larger;
    out["smaller"] = w.smaller;
  }
  (void)sys;
  return out;
}

}  // namespace

SystemModel parse_instance(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte == 0 ? 0 : e.byte - 1);
    throw ParseError("syntax error at line " + std::to_string(line) + ", column " + std::to_string(col) + ": " +
                     e.what());
  }
  if (!doc.is_object()) fail("", "instance must be a JSON object");

  SystemModel m;
  const json& subs = require(doc, "", "subprocesses");
  if (!subs.is_array()) fail("/subprocesses", "expected an array");
  for (std::size_t i = 0; i < subs.size(); ++i) {
    const std::string sp = "/subprocesses/" + std::to_string(i);
    if (!subs[i].is_object()) fail(sp, "expected an object");
    SubProcessModel sub;
    const json& tr = require(subs[i], sp, "transition");
    if (!tr.is_array()) fail(sp + "/transition", "expected one matrix per action");
    for (std::size_t a = 0; a < tr.size(); ++a)
      sub.transition.push_back(get_matrix(tr[a], sp + "/transition/" + std::to_string(a)));
    sub.reward = get_matrix(require(subs[i], sp, "reward"), sp + "/reward");
    m.subprocesses.push_back(std::move(sub));
  }
  m.K = get_int(require(doc, "", "K"), "/K");
  m.B = get_int(require(doc, "", "B"), "/B");
  m.T = get_int(require(doc, "", "T"), "/T");
  m.beta = get_double(require(doc, "", "beta"), "/beta");
  m.gamma = get_double(require(doc, "", "gamma"), "/gamma");

  if (auto it = doc.find("budget_mode"); it != doc.end()) {
    if (!it->is_string()) fail("/budget_mode", "expected \"at-most\" or \"exactly\"");
    const auto mode = it->get<std::string>();
    if (mode == "at-most") m.budget_mode = BudgetMode::at_most;
    else if (mode == "exactly") m.budget_mode = BudgetMode::exactly;
    else fail("/budget_mode", "unknown budget mode \"" + mode + "\"");
  }

  if (auto it = doc.find("global_reward"); it != doc.end()) {
    if (it->is_number()) {
      if (it->get<double>() != 0.0) fail("/global_reward", "only the literal 0 may replace the table");
    } else {
      m.global_reward = get_matrix(*it, "/global_reward");
    }
  }

  if (auto it = doc.find("state_order"); it != doc.end()) {
    if (it->is_string()) {
      if (it->get<std::string>() != "index") fail("/state_order", "unknown order \"" + it->get<std::string>() + "\"");
    } else if (it->is_array()) {
      if (it->size() != m.subprocesses.size()) fail("/state_order", "expected one order per subprocess");
      for (std::size_t i = 0; i < it->size(); ++i)
        m.state_order.push_back(get_order((*it)[i], m.subprocesses[i].n_states(), "/state_order/" + std::to_string(i)));
    } else {
      fail("/state_order", "expected \"index\" or an array of per-subprocess orders");
    }
  }

  if (auto it = doc.find("allow_idle_reward"); it != doc.end()) {
    if (!it->is_boolean()) fail("/allow_idle_reward", "expected a boolean");
    m.allow_idle_reward = it->get<bool>();
  }
  return m;
}

SystemModel load_instance(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string() + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_instance(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::string serialize_instance(const SystemModel& m) {
  json doc;
  json subs = json::array();
  for (const auto& sub : m.subprocesses) {
    json tr = json::array();
    for (const auto& p : sub.transition) tr.push_back(p.to_rows());
    subs.push_back({{"transition", std::move(tr)}, {"reward", sub.reward.to_rows()}});
  }
  doc["subprocesses"] = std::move(subs);
  doc["K"] = m.K;
  doc["B"] = m.B;
  doc["budget_mode"] = to_string(m.budget_mode);
  doc["T"] = m.T;
  doc["beta"] = m.beta;
  doc["gamma"] = m.gamma;
  if (m.global_reward.empty()) doc["global_reward"] = 0;
  else doc["global_reward"] = m.global_reward.to_rows();
  if (m.state_order.empty()) {
    doc["state_order"] = "index";
  } else {
    json orders = json::array();
    for (const auto& o : m.state_order) {
      if (o.is_index_order()) {
        orders.push_back("index");
      } else {
        json pairs = json::array();
        for (const auto& [lo, hi] : o.strict_pairs()) pairs.push_back({lo, hi});
        orders.push_back(std::move(pairs));
      }
    }
    doc["state_order"] = std::move(orders);
  }
  if (m.allow_idle_reward) doc["allow_idle_reward"] = true;
  return doc.dump(2) + "\n";
}

std::string solve_result_json(const System& sys, const SolveResult& r, const RunMetadata& meta) {
  json out = solve_json(sys, r);
  out["metadata"] = metadata_json(meta);
  out["metadata"]["framework"] = to_string(r.framework);
  return out.dump(2) + "\n";
}

std::string value_csv(const System& sys, const SolveResult& r) {
  std::string out = "state_index,components,value\n";
  for (std::size_t s = 0; s < sys.n_joint_states(); ++s)
    out += std::to_string(s) + "," + join_components(sys, s) + "," + csv_number(r.value[s]) + "\n";
  return out;
}

std::string assumption_report_json(const System& sys, const AssumptionReport& report) {
  json out;
  json items = json::array();
  for (int k = 1; k <= 5; ++k) {
    const auto& a = report[k];
    json item{{"id", "A" + std::to_string(k)}, {"verdict", to_string(a.verdict)}};
    if (!a.note.empty()) item["note"] = a.note;
    if (a.witness) item["witness"] = witness_json(sys, *a.witness);
    items.push_back(std::move(item));
  }
  out["assumptions"] = std::move(items);
  out["sufficient"] = report.sufficient();
  out["notes"] = report.notes;
  return out.dump(2) + "\n";
}

std::string comparison_json(const System& sys, const ComparisonReport& rep, const RunMetadata& meta) {
  json out;
  out["equivalent"] = rep.equivalent;
  out["sup_gap"] = rep.sup_gap;
  out["tolerance"] = rep.tolerance;
  out["gap"] = rep.gap;
  out["lower_envelope"] = rep.lower_envelope;
  out["sandwich_holds"] = rep.sandwich_holds;
  out["sandwich_violation"] = rep.sandwich_violation;
  json myopic = json::array();
  for (const auto& m : rep.myopic)
    myopic.push_back({{"state", m.state},
                      {"allocation", m.allocation.per_subprocess},
                      {"copt_epoch_reward", m.copt_epoch_reward},
                      {"myopic_epoch_reward", m.myopic_epoch_reward},
                      {"myopic", m.myopic}});
  out["myopic"] = std::move(myopic);
  out["copt"] = solve_json(sys, rep.copt);
  out["fopt"] = solve_json(sys, rep.fopt);
  out["metadata"] = metadata_json(meta);
  return out.dump(2) + "\n";
}

std::string comparison_csv(const System& sys, const ComparisonReport& rep) {
  std::string out = "state_index,components,V_copt,V_fopt,lower_envelope,gap\n";
  for (std::size_t s = 0; s < sys.n_joint_states(); ++s)
    out += std::to_string(s) + "," + join_components(sys, s) + "," + csv_number(rep.copt.value[s]) + "," +
           csv_number(rep.fopt.value[s]) + "," + csv_number(rep.lower_envelope[s]) + "," + csv_number(rep.gap[s]) +
           "\n";
  return out;
}

std::string describe(const Witness& w) { return w.message; }

void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

}  // namespace hmdp::io
