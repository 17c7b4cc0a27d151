#pragma once

#include <optional>
#include <string>

#include "cfa/domains.hpp"

// Pluggable address policies for the value store and the continuation store.
// The continuation policy is what separates a classical finite-state CFA
// (target-expression addresses) from pushdown-precise analyses (AAC, P4F).

namespace cfa {

enum class ValuePolicy {
  Mono,            // address = the variable itself (0-CFA)
  CallSensitive1,  // address = (variable, call site) (1-CFA)
};

enum class KontPolicy {
  TargetExp,       // address = target expression
  TargetExpCall1,  // address = (target expression, source expression)
  AAC,             // address = (target exp, target env, source exp, source env, source store)
  P4F,             // address = (target exp, target env)
};

struct PolicyPair {
  ValuePolicy value = ValuePolicy::Mono;
  KontPolicy kont = KontPolicy::P4F;
};

// Deduplicates store snapshots so AAC addresses compare by pointer in the
// common case. Equality stays structural: two interners never disagree.
class StoreInterner {
 public:
  InternedStore intern(const Store& s);
  size_t size() const { return pool_.size(); }

 private:
  std::map<Store, InternedStore> pool_;
};

AbsAddr value_alloc(ValuePolicy policy, const Var& x, Label site);

inline AbsAddr value_alloc(ValuePolicy policy, const Var& x,
                           const AbstractState& state) {
  return value_alloc(policy, x, state.exp->label);
}

// Continuation-address allocation at a call transition. The source state is
// (src_exp, src_env, src_store); the target is the callee body entry
// (target, target_env) with the already-extended store target_store. Only AAC
// consults a store, and only the source one.
KontAddr kont_alloc(KontPolicy policy, Label src_exp, const AbsEnv& src_env,
                    const Store& src_store, const Exp* target,
                    const AbsEnv& target_env, const Store& target_store,
                    StoreInterner& interner);

inline KontAddr kont_alloc(KontPolicy policy, const AbstractState& src,
                           const Exp* target, const AbsEnv& target_env,
                           const Store& target_store, StoreInterner& interner) {
  return kont_alloc(policy, src.exp->label, src.env, src.store, target,
                    target_env, target_store, interner);
}

// The entry configuration determined by a continuation address: the halt
// address maps to the initial configuration, a P4F address to the head of its
// intraprocedural group. Other address shapes do not determine one.
std::optional<Configuration> entry_config(const KontAddr& ka, const Program& p);

std::optional<ValuePolicy> value_policy_from_name(const std::string& name);
std::optional<KontPolicy> kont_policy_from_name(const std::string& name);
std::string to_string(ValuePolicy p);
std::string to_string(KontPolicy p);

}  // namespace cfa
