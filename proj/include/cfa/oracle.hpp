#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "cfa/fixpoint.hpp"

// Store-widened unbounded-stack analysis: the reference machine that keeps
// call stacks fully explicit. Stack depth is bounded to keep it computable;
// a completeness flag records whether the bound was ever hit. From a complete
// fixed point we extract a Dyck state graph, and the precision checker
// relates finite-state results to this machine through implied stacks.

namespace cfa {

// Configuration of the unbounded-stack machine: explicit frame list, top
// first. The store lives globally in the OracleResult.
struct HatConfig {
  const Exp* exp = nullptr;
  AbsEnv env;
  std::vector<AbsFrame> kont;

  friend std::strong_ordering operator<=>(const HatConfig& a,
                                          const HatConfig& b) {
    if (auto c = a.exp->label <=> b.exp->label; c != 0) return c;
    if (auto c = a.env <=> b.env; c != 0) return c;
    return a.kont <=> b.kont;
  }
  friend bool operator==(const HatConfig& a, const HatConfig& b) {
    return (a <=> b) == 0;
  }
};

struct OracleResult {
  std::set<HatConfig> reachable;
  Store store;
  FlowSet halt_flows;
  uint32_t depth_bound = 0;
  bool complete = false;  // no configuration was cut at the depth bound
  const Program* program = nullptr;
  ValuePolicy value_policy = ValuePolicy::Mono;
  Metrics metrics;
};

struct IncompleteOracle : std::runtime_error {
  explicit IncompleteOracle(const std::string& what)
      : std::runtime_error(what) {}
};

struct OracleOptions {
  uint64_t max_configurations = 2'000'000;
};

OracleResult oracle_analyze(const Program& p, ValuePolicy value_policy,
                            uint32_t depth_bound,
                            const OracleOptions& opts = {});

// --- Dyck state graph ---------------------------------------------------------

struct DyckVertex {
  const Exp* exp = nullptr;
  AbsEnv env;

  friend std::strong_ordering operator<=>(const DyckVertex& a,
                                          const DyckVertex& b) {
    if (auto c = a.exp->label <=> b.exp->label; c != 0) return c;
    return a.env <=> b.env;
  }
  friend bool operator==(const DyckVertex& a, const DyckVertex& b) {
    return (a <=> b) == 0;
  }
};

enum class StackAction { Push, Pop };

struct DyckEdge {
  DyckVertex src;
  StackAction action = StackAction::Push;
  AbsFrame frame;
  DyckVertex dst;

  friend std::strong_ordering operator<=>(const DyckEdge& a, const DyckEdge& b) {
    if (auto c = a.src <=> b.src; c != 0) return c;
    if (auto c = a.action <=> b.action; c != 0) return c;
    if (auto c = a.frame <=> b.frame; c != 0) return c;
    return a.dst <=> b.dst;
  }
  friend bool operator==(const DyckEdge& a, const DyckEdge& b) {
    return (a <=> b) == 0;
  }
};

struct DyckGraph {
  std::set<DyckVertex> vertices;
  std::set<DyckEdge> edges;
};

// Push/pop-annotated transition graph of a complete oracle fixed point.
// Throws IncompleteOracle when the fixed point was cut at the depth bound.
DyckGraph dsg_extract(const OracleResult& oracle);

std::string dsg_to_dot(const DyckGraph& g);

// --- Implied stacks -------------------------------------------------------------

// Explicit frame chain read off the continuation store, top first.
using ImpliedStack = std::vector<AbsKont>;

struct ImpliedStacks {
  std::set<ImpliedStack> stacks;
  bool exhausted = true;  // false when some chain was cut at the depth bound
};

// Every stack implied by a continuation address: the empty stack for the halt
// address, otherwise each stored continuation prepended to the stacks implied
// by its tail. Enumeration stops at depth_bound frames.
ImpliedStacks implied_stacks(const KontAddr& ka, const KStore& kstore,
                             uint32_t depth_bound);

std::vector<AbsFrame> concretize_stack(const ImpliedStack& stack);
HatConfig concretize_config(const Configuration& c, const ImpliedStack& stack);

// --- Precision check ------------------------------------------------------------

struct PrecisionViolation {
  enum class Kind { MissingConfig, StoreExcess };
  Kind kind = Kind::MissingConfig;
  Configuration config;                 // finite-state side (MissingConfig)
  ImpliedStack stack;                   // the implied stack involved
  std::optional<HatConfig> missing;     // oracle config not found
  std::optional<AbsAddr> addr;          // store violation address
  FlowSet excess;                       // finite flows absent from the oracle
};

struct PrecisionReport {
  std::vector<PrecisionViolation> violations;
  uint64_t checked_pairs = 0;     // (configuration, implied stack) pairs tested
  uint64_t residual_chains = 0;   // configurations with unexhausted enumeration
  bool oracle_complete = false;
  bool ok() const { return violations.empty(); }
};

// Checks that the finite-state result is no less precise than the oracle:
// every reachable configuration paired with each of its implied stacks must
// appear in the oracle's reachable set, and the finite value store must be
// pointwise below the oracle store. Requires a complete oracle.
PrecisionReport precision_check(const AnalysisResult& xi,
                                const OracleResult& oracle,
                                uint32_t depth_bound);

std::string to_string(const HatConfig& c);

}  // namespace cfa
