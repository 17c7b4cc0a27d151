#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>

#include "cfa/machine.hpp"

// Global-store-widened collecting semantics: a worklist engine over
// store-less configurations with one monotone value store and one monotone
// continuation store, plus the per-state-store collecting semantics at test
// scale for cross-validation.

namespace cfa {

struct Metrics {
  uint64_t configurations = 0;   // |reachable| at the fixed point
  uint64_t states_visited = 0;   // worklist dequeues (re-processing counts)
  uint64_t transitions = 0;      // successor edges produced, with multiplicity
  uint64_t iterations = 0;       // global store/kstore change epochs
  uint64_t dropped_non_callable = 0;
  double wall_ms = 0.0;
};

struct AnalysisResult {
  std::set<Configuration> reachable;
  Store store;
  KStore kstore;
  FlowSet halt_flows;
  Metrics metrics;
};

enum class WorklistOrder { Fifo, Lifo };

struct AnalyzeOptions {
  WorklistOrder order = WorklistOrder::Fifo;
  uint64_t max_configurations = 2'000'000;
  uint64_t max_visits = 50'000'000;
  // Re-checks wf_init / wf_halt and monotone growth after every dequeue.
  bool check_invariants = false;
};

struct ResourceLimit : std::runtime_error {
  explicit ResourceLimit(const std::string& what) : std::runtime_error(what) {}
};

struct UnknownVariable : std::runtime_error {
  explicit UnknownVariable(const Var& name)
      : std::runtime_error("unknown variable: " + name) {}
};

// One application of the widened transfer function: steps every reachable
// configuration against the global stores, joins all produced deltas and
// re-adds the initial configuration. Monotone in all components.
AnalysisResult widened_transfer(const AnalysisResult& xi, const Program& p,
                                const PolicyPair& policy);

// Least fixed point of the widened transfer from the initial result, computed
// with a worklist that re-enqueues a configuration whenever a store address
// it read changes.
AnalysisResult analyze(const Program& p, const PolicyPair& policy,
                       const AnalyzeOptions& opts = {});

// All value-store entries whose address binds x. Throws UnknownVariable when
// x is not a binder of the program.
std::map<AbsAddr, FlowSet> flow_query(const AnalysisResult& xi,
                                      const Program& p, const Var& x);

// Fixpoint of the per-state-store collecting semantics; every reachable
// AbstractState, each carrying its own stores.
std::set<AbstractState> naive_collect(const Program& p,
                                      const PolicyPair& policy,
                                      uint64_t state_limit = 100'000);

}  // namespace cfa
