#pragma once

#include <string>
#include <vector>

// Built-in benchmark corpus. The classic pushdown-precision benchmarks are
// reconstructed for this IR: calls are unary (multi-argument functions are
// curried), recursion goes through self-application, and numeric tests are
// zero?-guarded. Absolute state counts are therefore specific to these
// sources; cross-policy comparisons are what the suite asserts.

namespace cfa {

struct CorpusEntry {
  std::string name;
  std::string source;
  bool expected_oracle_completes = false;  // at stack depth 12
  std::string notes;
};

const std::vector<CorpusEntry>& builtin_corpus();

// *.scm / *.anf files of a directory, sorted by filename.
std::vector<CorpusEntry> load_corpus_dir(const std::string& dir);

// Two calls of one identity function in sequence; the classic return-flow
// merging witness.
std::string identity_pair_source();

// n sequential non-tail calls through one shared function; scaling family.
std::string nested_call_family(int n);

}  // namespace cfa
