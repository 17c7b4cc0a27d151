#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "cfa/corpus.hpp"
#include "cfa/report.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

int cmd_analyze(const std::string& file, const std::string& value_policy,
                const std::string& kont_policy, const std::string& json_out,
                const std::string& dot_out, uint32_t oracle_depth,
                bool check_precision) {
  auto vp = cfa::value_policy_from_name(value_policy);
  auto kp = cfa::kont_policy_from_name(kont_policy);
  if (!vp || !kp) {
    std::cerr << "unknown policy\n";
    return 1;
  }
  cfa::PolicyPair policy{*vp, *kp};
  cfa::Program program = cfa::parse_program(read_file(file));
  cfa::ValidationReport validation = cfa::validate_anf(program);
  if (!validation.ok()) {
    for (const auto& v : validation.violations)
      std::cerr << "violation: " << v.message << "\n";
    return 1;
  }

  cfa::AnalysisResult result = cfa::analyze(program, policy);
  std::cout << "configurations: " << result.metrics.configurations << "\n"
            << "states visited: " << result.metrics.states_visited << "\n"
            << "transitions:    " << result.metrics.transitions << "\n"
            << "halt flows:     " << cfa::to_string(result.halt_flows) << "\n";
  for (const auto& [name, label] : program.binder_table()) {
    (void)label;
    auto flows = cfa::flow_query(result, program, name);
    for (const auto& [addr, d] : flows)
      std::cout << "  " << cfa::to_string(addr) << " -> " << cfa::to_string(d)
                << "\n";
  }
  if (!json_out.empty())
    write_file(json_out,
               cfa::analysis_report_json(file, program, policy, result));

  if (!dot_out.empty() || check_precision) {
    cfa::OracleResult oracle = cfa::oracle_analyze(program, *vp, oracle_depth);
    if (!dot_out.empty()) {
      if (!oracle.complete) {
        std::cerr << "oracle incomplete at depth " << oracle_depth
                  << "; no Dyck graph emitted\n";
        return 1;
      }
      write_file(dot_out, cfa::dsg_to_dot(cfa::dsg_extract(oracle)));
    }
    if (check_precision) {
      if (!oracle.complete) {
        std::cerr << "oracle incomplete at depth " << oracle_depth
                  << "; cannot check precision\n";
        return 1;
      }
      cfa::PrecisionReport report =
          cfa::precision_check(result, oracle, oracle_depth);
      std::cout << cfa::precision_report_json(report);
      if (!report.ok()) return 2;
    }
  }
  return 0;
}

int cmd_bench(const std::string& corpus_dir, const std::string& json_out,
              const std::string& csv_out, const std::string& plot_out,
              bool sequential) {
  std::vector<cfa::CorpusEntry> corpus =
      corpus_dir.empty() ? cfa::builtin_corpus()
                         : cfa::load_corpus_dir(corpus_dir);
  cfa::MatrixOptions opts;
  opts.parallel = !sequential;
  std::vector<cfa::ComparisonRow> rows = cfa::run_matrix(corpus, opts);

  for (const auto& row : rows) {
    std::cout << row.program << (row.ok ? "" : "  ERROR: " + row.error) << "\n";
    for (const char* vp : {"mono", "1cfa"}) {
      auto aac = row.cells.find({vp, "aac"});
      auto p4f = row.cells.find({vp, "p4f"});
      if (aac == row.cells.end() || p4f == row.cells.end()) continue;
      std::cout << "  " << vp << ": aac " << aac->second.configurations << "/"
                << aac->second.states_visited << "  p4f "
                << p4f->second.configurations << "/"
                << p4f->second.states_visited << "  equal-precision "
                << (row.precision_equal_aac_p4f.count(vp) &&
                            row.precision_equal_aac_p4f.at(vp)
                        ? "yes"
                        : "no")
                << "\n";
    }
  }
  for (const auto& [vp, s] : cfa::summarize(rows)) {
    std::cout << vp << " summary: geomean configs " << s.geomean_config_ratio
              << "x, geomean states " << s.geomean_states_ratio << "x, max "
              << s.max_ratio << "x, strict wins " << s.strict_config_wins
              << "/" << s.rows << "\n";
  }
  if (!json_out.empty()) write_file(json_out, cfa::matrix_report_json(rows));
  if (!csv_out.empty()) write_file(csv_out, cfa::matrix_report_csv(rows));
  if (!plot_out.empty()) write_file(plot_out, cfa::matrix_report_gnuplot(rows));
  bool all_ok = true;
  for (const auto& row : rows) all_ok = all_ok && row.ok;
  return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"control-flow analysis workbench for a small ANF lambda language"};
  app.require_subcommand(1);

  std::string file, value_policy = "mono", kont_policy = "p4f";
  std::string json_out, dot_out;
  uint32_t oracle_depth = 12;
  bool check_precision = false;

  CLI::App* analyze = app.add_subcommand("analyze", "analyze one program");
  analyze->add_option("file", file, "program source file")->required();
  analyze->add_option("--value-policy", value_policy, "mono|1cfa");
  analyze->add_option("--kont-policy", kont_policy,
                      "naive|naive-1cfa|aac|p4f");
  analyze->add_option("--json", json_out, "write a JSON report");
  analyze->add_option("--dot", dot_out, "write the oracle Dyck graph as DOT");
  analyze->add_option("--oracle-depth", oracle_depth,
                      "stack depth bound for the oracle");
  analyze->add_flag("--check-precision", check_precision,
                    "compare against the unbounded-stack oracle (exit 2 on "
                    "violations)");

  std::string corpus_dir, bench_json, bench_csv, bench_plot;
  bool matrix = false, sequential = false;
  CLI::App* bench = app.add_subcommand("bench", "run the comparison matrix");
  bench->add_option("--corpus", corpus_dir,
                    "directory of .scm/.anf programs (default: built-in corpus)");
  bench->add_flag("--matrix", matrix, "run all value/kont policy combinations");
  bench->add_option("--out", bench_json, "write the JSON report");
  bench->add_option("--csv", bench_csv, "write a CSV table");
  bench->add_option("--plot", bench_plot, "write gnuplot-ready data");
  bench->add_flag("--sequential", sequential, "disable parallel workers");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*analyze)
      return cmd_analyze(file, value_policy, kont_policy, json_out, dot_out,
                         oracle_depth, check_precision);
    if (*bench)
      return cmd_bench(corpus_dir, bench_json, bench_csv, bench_plot, sequential);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
