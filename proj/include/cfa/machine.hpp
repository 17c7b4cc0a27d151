#pragma once

#include <cstdint>
#include <set>
#include <vector>

#include "cfa/allocators.hpp"
#include "cfa/domains.hpp"

// The nondeterministic finite-state transition relation: call transitions
// bind the callee parameter and extend the continuation store, return
// transitions pop through the continuation store, conditionals fork on flow
// sets and tail calls reuse the caller's continuation address.

namespace cfa {

// One successor together with the store extensions that produced it. The
// deltas are joined into per-state stores by abs_step and into the globals by
// the widened engine.
struct Succession {
  Configuration config;
  Store store_delta;
  KStore kstore_delta;
};

struct StepOutput {
  std::vector<Succession> successors;
  FlowSet halt_flows;             // values delivered to the halt continuation
  std::set<AbsAddr> value_reads;  // store addresses consulted (hit or miss)
  std::set<KontAddr> kont_reads;  // kstore addresses consulted
  uint64_t dropped_non_callable = 0;
};

// Steps a configuration against the given stores. Pure except for snapshot
// interning under AAC.
StepOutput step_config(const Program& p, const Configuration& c,
                       const Store& store, const KStore& kstore,
                       const PolicyPair& policy, StoreInterner& interner);

AbstractState abs_inject(const Program& p);

// Per-state-store transition relation: successors carry their own joined
// stores. Drives the naive collecting semantics and the unit tests.
std::set<AbstractState> abs_step(const Program& p, const AbstractState& state,
                                 const PolicyPair& policy,
                                 StoreInterner& interner);

FlowSet abs_apply_prim(Prim op, const FlowSet& args);
FlowSet abs_apply_prim_partial(Prim op, const FlowSet& args);

}  // namespace cfa
