#include "cfa/allocators.hpp"

namespace cfa {

InternedStore StoreInterner::intern(const Store& s) {
  auto it = pool_.find(s);
  if (it != pool_.end()) return it->second;
  auto snapshot = std::make_shared<const Store>(s);
  pool_.emplace(s, snapshot);
  return snapshot;
}

AbsAddr value_alloc(ValuePolicy policy, const Var& x, Label site) {
  switch (policy) {
    case ValuePolicy::Mono:
      return MonoVar{x};
    case ValuePolicy::CallSensitive1:
      return CallVar{x, site};
  }
  return MonoVar{x};
}

KontAddr kont_alloc(KontPolicy policy, Label src_exp, const AbsEnv& src_env,
                    const Store& src_store, const Exp* target,
                    const AbsEnv& target_env, const Store& target_store,
                    StoreInterner& interner) {
  (void)target_store;
  switch (policy) {
    case KontPolicy::TargetExp:
      return TargetExpAddr{target->label};
    case KontPolicy::TargetExpCall1:
      return TargetExpCallAddr{target->label, src_exp};
    case KontPolicy::P4F:
      return P4FAddr{target->label, target_env};
    case KontPolicy::AAC:
      return AACAddr{target->label, target_env, src_exp, src_env,
                     interner.intern(src_store)};
  }
  return TargetExpAddr{target->label};
}

std::optional<Configuration> entry_config(const KontAddr& ka, const Program& p) {
  if (is_halt(ka)) return Configuration{p.root(), AbsEnv{}, HaltAddr{}};
  if (const auto* addr = std::get_if<P4FAddr>(&ka))
    return Configuration{p.exp_at(addr->target), addr->env, ka};
  return std::nullopt;
}

std::optional<ValuePolicy> value_policy_from_name(const std::string& name) {
  if (name == "mono") return ValuePolicy::Mono;
  if (name == "1cfa") return ValuePolicy::CallSensitive1;
  return std::nullopt;
}

std::optional<KontPolicy> kont_policy_from_name(const std::string& name) {
  if (name == "naive") return KontPolicy::TargetExp;
  if (name == "naive-1cfa") return KontPolicy::TargetExpCall1;
  if (name == "aac") return KontPolicy::AAC;
  if (name == "p4f") return KontPolicy::P4F;
  return std::nullopt;
}

std::string to_string(ValuePolicy p) {
  return p == ValuePolicy::Mono ? "mono" : "1cfa";
}

std::string to_string(KontPolicy p) {
  switch (p) {
    case KontPolicy::TargetExp: return "naive";
    case KontPolicy::TargetExpCall1: return "naive-1cfa";
    case KontPolicy::AAC: return "aac";
    case KontPolicy::P4F: return "p4f";
  }
  return "?";
}

}  // namespace cfa
