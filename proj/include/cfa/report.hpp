#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cfa/corpus.hpp"
#include "cfa/fixpoint.hpp"
#include "cfa/oracle.hpp"

// Comparison-matrix runner and machine-readable report emission (JSON, CSV,
// gnuplot data).

namespace cfa {

struct CellResult {
  bool ok = false;
  std::string error;
  uint64_t configurations = 0;
  uint64_t states_visited = 0;
  uint64_t transitions = 0;
  double wall_ms = 0.0;
};

struct ComparisonRow {
  std::string program;
  bool ok = false;
  std::string error;
  // keyed by (value policy name, kont policy name)
  std::map<std::pair<std::string, std::string>, CellResult> cells;
  // per value policy: AAC and P4F value stores carry identical flow sets
  std::map<std::string, bool> precision_equal_aac_p4f;
};

struct MatrixOptions {
  bool parallel = true;
  AnalyzeOptions analyze;
};

std::vector<ComparisonRow> run_matrix(const std::vector<CorpusEntry>& corpus,
                                      const MatrixOptions& opts = {});

struct PolicySummary {
  double geomean_config_ratio = 0.0;  // AAC / P4F
  double geomean_states_ratio = 0.0;
  double max_ratio = 0.0;
  int strict_config_wins = 0;  // rows with P4F configurations strictly below AAC
  int rows = 0;
};

// Geometric-mean AAC/P4F cost ratios per value policy.
std::map<std::string, PolicySummary> summarize(const std::vector<ComparisonRow>& rows);

// Single-analysis report: {program, value_policy, kont_policy,
// configurations, states_visited, transitions, flows, wall_ms}.
std::string analysis_report_json(const std::string& program_name,
                                 const Program& p, const PolicyPair& policy,
                                 const AnalysisResult& result);

// {violations, checked_pairs, oracle_complete}.
std::string precision_report_json(const PrecisionReport& report);

// Full matrix report with a determinism hash computed over the report with
// wall-clock fields zeroed.
std::string matrix_report_json(const std::vector<ComparisonRow>& rows);

std::string matrix_report_csv(const std::vector<ComparisonRow>& rows);

// gnuplot-ready data: one row per program, AAC/P4F configuration and state
// counts per value policy.
std::string matrix_report_gnuplot(const std::vector<ComparisonRow>& rows);

}  // namespace cfa
