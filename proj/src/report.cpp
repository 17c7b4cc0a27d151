#include "cfa/report.hpp"

#include <cmath>
#include <future>
#include <sstream>

#include <json.hpp>

namespace cfa {

namespace {

using nlohmann::json;

const std::vector<ValuePolicy> kValuePolicies = {ValuePolicy::Mono,
                                                 ValuePolicy::CallSensitive1};
const std::vector<KontPolicy> kKontPolicies = {
    KontPolicy::TargetExp, KontPolicy::TargetExpCall1, KontPolicy::AAC,
    KontPolicy::P4F};

ComparisonRow run_row(const CorpusEntry& entry, const MatrixOptions& opts) {
  ComparisonRow row;
  row.program = entry.name;
  try {
    Program p = parse_program(entry.source);
    ValidationReport validation = validate_anf(p);
    if (!validation.ok())
      throw std::runtime_error("validation failed: " +
                               validation.violations.front().message);
    std::map<std::string, Store> aac_store, p4f_store;
    for (ValuePolicy vp : kValuePolicies) {
      for (KontPolicy kp : kKontPolicies) {
        CellResult cell;
        try {
          AnalysisResult result = analyze(p, PolicyPair{vp, kp}, opts.analyze);
          cell.ok = true;
          cell.configurations = result.metrics.configurations;
          cell.states_visited = result.metrics.states_visited;
          cell.transitions = result.metrics.transitions;
          cell.wall_ms = result.metrics.wall_ms;
          if (kp == KontPolicy::AAC) aac_store[to_string(vp)] = result.store;
          if (kp == KontPolicy::P4F) p4f_store[to_string(vp)] = result.store;
        } catch (const std::exception& e) {
          cell.error = e.what();
        }
        row.cells[{to_string(vp), to_string(kp)}] = cell;
      }
      row.precision_equal_aac_p4f[to_string(vp)] =
          aac_store.count(to_string(vp)) && p4f_store.count(to_string(vp)) &&
          aac_store[to_string(vp)] == p4f_store[to_string(vp)];
    }
    row.ok = true;
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

json cell_to_json(const CellResult& cell, bool with_wall) {
  json j;
  j["ok"] = cell.ok;
  if (!cell.error.empty()) j["error"] = cell.error;
  j["configurations"] = cell.configurations;
  j["states_visited"] = cell.states_visited;
  j["transitions"] = cell.transitions;
  j["wall_ms"] = with_wall ? cell.wall_ms : 0.0;
  return j;
}

json rows_to_json(const std::vector<ComparisonRow>& rows, bool with_wall) {
  json out = json::array();
  for (const ComparisonRow& row : rows) {
    json r;
    r["program"] = row.program;
    r["ok"] = row.ok;
    if (!row.error.empty()) r["error"] = row.error;
    json cells = json::object();
    for (const auto& [key, cell] : row.cells)
      cells[key.first + "/" + key.second] = cell_to_json(cell, with_wall);
    r["cells"] = std::move(cells);
    r["precision_equal_aac_p4f"] = row.precision_equal_aac_p4f;
    out.push_back(std::move(r));
  }
  return out;
}

uint64_t fnv1a(const std::string& text) {
  uint64_t h = 14695981039346656037ull;
  for (char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

json flows_to_json(const Program& p, const AnalysisResult& result) {
  json flows = json::object();
  for (const auto& [name, label] : p.binder_table()) {
    (void)label;
    std::map<AbsAddr, FlowSet> per_var;
    for (const auto& [addr, d] : result.store) {
      const Var* bound = nullptr;
      if (const auto* m = std::get_if<MonoVar>(&addr)) bound = &m->name;
      else if (const auto* cv = std::get_if<CallVar>(&addr)) bound = &cv->name;
      if (bound && *bound == name) per_var.emplace(addr, d);
    }
    if (per_var.empty()) continue;
    json var_flows = json::object();
    for (const auto& [addr, d] : per_var) {
      json values = json::array();
      for (const AbsValue& v : d) values.push_back(to_string(v));
      var_flows[to_string(addr)] = std::move(values);
    }
    flows[name] = std::move(var_flows);
  }
  return flows;
}

}  // namespace

std::vector<ComparisonRow> run_matrix(const std::vector<CorpusEntry>& corpus,
                                      const MatrixOptions& opts) {
  std::vector<ComparisonRow> rows(corpus.size());
  if (opts.parallel) {
    std::vector<std::future<ComparisonRow>> futures;
    futures.reserve(corpus.size());
    for (const CorpusEntry& entry : corpus)
      futures.push_back(std::async(std::launch::async, run_row, std::cref(entry),
                                   std::cref(opts)));
    for (size_t i = 0; i < futures.size(); ++i) rows[i] = futures[i].get();
  } else {
    for (size_t i = 0; i < corpus.size(); ++i) rows[i] = run_row(corpus[i], opts);
  }
  return rows;
}

std::map<std::string, PolicySummary> summarize(
    const std::vector<ComparisonRow>& rows) {
  std::map<std::string, PolicySummary> out;
  for (const char* vp : {"mono", "1cfa"}) {
    PolicySummary s;
    double log_config = 0.0, log_states = 0.0;
    for (const ComparisonRow& row : rows) {
      auto aac = row.cells.find({vp, "aac"});
      auto p4f = row.cells.find({vp, "p4f"});
      if (aac == row.cells.end() || p4f == row.cells.end()) continue;
      if (!aac->second.ok || !p4f->second.ok) continue;
      double config_ratio = static_cast<double>(aac->second.configurations) /
                            static_cast<double>(p4f->second.configurations);
      double states_ratio = static_cast<double>(aac->second.states_visited) /
                            static_cast<double>(p4f->second.states_visited);
      log_config += std::log(config_ratio);
      log_states += std::log(states_ratio);
      s.max_ratio = std::max({s.max_ratio, config_ratio, states_ratio});
      if (p4f->second.configurations < aac->second.configurations)
        ++s.strict_config_wins;
      ++s.rows;
    }
    if (s.rows > 0) {
      s.geomean_config_ratio = std::exp(log_config / s.rows);
      s.geomean_states_ratio = std::exp(log_states / s.rows);
    }
    out[vp] = s;
  }
  return out;
}

std::string analysis_report_json(const std::string& program_name,
                                 const Program& p, const PolicyPair& policy,
                                 const AnalysisResult& result) {
  json j;
  j["program"] = program_name;
  j["value_policy"] = to_string(policy.value);
  j["kont_policy"] = to_string(policy.kont);
  j["configurations"] = result.metrics.configurations;
  j["states_visited"] = result.metrics.states_visited;
  j["transitions"] = result.metrics.transitions;
  j["flows"] = flows_to_json(p, result);
  json halts = json::array();
  for (const AbsValue& v : result.halt_flows) halts.push_back(to_string(v));
  j["halt_flows"] = std::move(halts);
  j["wall_ms"] = result.metrics.wall_ms;
  return j.dump(2) + "\n";
}

std::string precision_report_json(const PrecisionReport& report) {
  json j;
  json violations = json::array();
  for (const PrecisionViolation& v : report.violations) {
    json item;
    if (v.kind == PrecisionViolation::Kind::MissingConfig) {
      item["kind"] = "missing_config";
      item["config"] = to_string(v.config);
      json stack = json::array();
      for (const AbsKont& k : v.stack)
        stack.push_back(to_string(k.frame) + ":" + to_string(k.tail));
      item["implied_stack"] = std::move(stack);
      if (v.missing) item["missing_oracle_config"] = to_string(*v.missing);
    } else {
      item["kind"] = "store_excess";
      item["addr"] = to_string(*v.addr);
      item["excess"] = to_string(v.excess);
    }
    violations.push_back(std::move(item));
  }
  j["violations"] = std::move(violations);
  j["checked_pairs"] = report.checked_pairs;
  j["residual_chains"] = report.residual_chains;
  j["oracle_complete"] = report.oracle_complete;
  return j.dump(2) + "\n";
}

std::string matrix_report_json(const std::vector<ComparisonRow>& rows) {
  json j;
  j["rows"] = rows_to_json(rows, true);
  json summary = json::object();
  for (const auto& [vp, s] : summarize(rows)) {
    summary[vp] = {{"geomean_config_ratio", s.geomean_config_ratio},
                   {"geomean_states_ratio", s.geomean_states_ratio},
                   {"max_ratio", s.max_ratio},
                   {"strict_config_wins", s.strict_config_wins},
                   {"rows", s.rows}};
  }
  j["summary"] = std::move(summary);
  j["determinism_hash"] = fnv1a(rows_to_json(rows, false).dump());
  return j.dump(2) + "\n";
}

std::string matrix_report_csv(const std::vector<ComparisonRow>& rows) {
  std::ostringstream out;
  out << "program,value_policy,kont_policy,configurations,states_visited,"
         "transitions,wall_ms,ok\n";
  for (const ComparisonRow& row : rows) {
    for (const auto& [key, cell] : row.cells) {
      out << row.program << "," << key.first << "," << key.second << ","
          << cell.configurations << "," << cell.states_visited << ","
          << cell.transitions << "," << cell.wall_ms << ","
          << (cell.ok ? "1" : "0") << "\n";
    }
  }
  return out.str();
}

std::string matrix_report_gnuplot(const std::vector<ComparisonRow>& rows) {
  std::ostringstream out;
  out << "# program aac_configs_mono p4f_configs_mono aac_states_mono "
         "p4f_states_mono aac_configs_1cfa p4f_configs_1cfa aac_states_1cfa "
         "p4f_states_1cfa\n";
  for (const ComparisonRow& row : rows) {
    out << row.program;
    for (const char* vp : {"mono", "1cfa"}) {
      auto aac = row.cells.find({vp, "aac"});
      auto p4f = row.cells.find({vp, "p4f"});
      bool have = aac != row.cells.end() && p4f != row.cells.end() &&
                  aac->second.ok && p4f->second.ok;
      if (have)
        out << " " << aac->second.configurations << " "
            << p4f->second.configurations << " " << aac->second.states_visited
            << " " << p4f->second.states_visited;
      else
        out << " - - - -";
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace cfa
