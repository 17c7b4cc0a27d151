#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "cfa/syntax.hpp"

// Finite abstract domains shared by the finite-state machine and the
// unbounded-stack machine: addresses, environments, flow sets, stores and
// store-allocated continuations. Everything is an immutable value with a
// total order so set/map iteration is canonical.

namespace cfa {

// --- Value-store addresses --------------------------------------------------

struct MonoVar {
  Var name;
  auto operator<=>(const MonoVar&) const = default;
};

struct CallVar {
  Var name;
  Label site;
  auto operator<=>(const CallVar&) const = default;
};

using AbsAddr = std::variant<MonoVar, CallVar>;

// --- Environments -----------------------------------------------------------

// Trimmed binding environment: dom(env at e) == free_vars(e). Kept sorted so
// comparison and iteration are canonical.
class AbsEnv {
 public:
  AbsEnv() = default;

  const AbsAddr* lookup(const Var& x) const;
  AbsEnv bind(const Var& x, AbsAddr a) const;
  AbsEnv restrict_to(const std::set<Var>& keep) const;

  bool empty() const { return entries_.empty(); }
  size_t size() const { return entries_.size(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  auto operator<=>(const AbsEnv&) const = default;

 private:
  std::vector<std::pair<Var, AbsAddr>> entries_;
};

// --- Abstract values and flow sets -------------------------------------------

struct AbsClo {
  const Lam* lam = nullptr;
  AbsEnv env;

  friend std::strong_ordering operator<=>(const AbsClo& a, const AbsClo& b) {
    if (auto c = a.lam->id <=> b.lam->id; c != 0) return c;
    return a.env <=> b.env;
  }
  friend bool operator==(const AbsClo& a, const AbsClo& b) {
    return (a <=> b) == 0;
  }
};

struct AbsBool {
  bool value = false;
  auto operator<=>(const AbsBool&) const = default;
};

// Single top element for all numbers.
struct AbsNum {
  auto operator<=>(const AbsNum&) const = default;
};

struct AbsPrim {
  Prim op;
  auto operator<=>(const AbsPrim&) const = default;
};

// A binary primitive applied to its first operand. The operand is always the
// abstract number, so only the operator is carried.
struct AbsPrimPartial {
  Prim op;
  auto operator<=>(const AbsPrimPartial&) const = default;
};

using AbsValue = std::variant<AbsClo, AbsBool, AbsNum, AbsPrim, AbsPrimPartial>;

using FlowSet = std::set<AbsValue>;

// Absent keys denote bottom; no key maps to the empty set.
using Store = std::map<AbsAddr, FlowSet>;

// Canonical immutable store snapshot produced by a StoreInterner. Equality is
// structural with a pointer fast path.
using InternedStore = std::shared_ptr<const Store>;

// --- Continuation addresses ---------------------------------------------------

struct HaltAddr {
  auto operator<=>(const HaltAddr&) const = default;
};

struct TargetExpAddr {
  Label target;
  auto operator<=>(const TargetExpAddr&) const = default;
};

struct TargetExpCallAddr {
  Label target;
  Label from;
  auto operator<=>(const TargetExpCallAddr&) const = default;
};

struct P4FAddr {
  Label target;
  AbsEnv env;
  auto operator<=>(const P4FAddr&) const = default;
};

struct AACAddr {
  Label target;
  AbsEnv target_env;
  Label src;
  AbsEnv src_env;
  InternedStore src_store;

  friend std::strong_ordering operator<=>(const AACAddr& a, const AACAddr& b);
  friend bool operator==(const AACAddr& a, const AACAddr& b) {
    return (a <=> b) == 0;
  }
};

using KontAddr =
    std::variant<HaltAddr, TargetExpAddr, TargetExpCallAddr, P4FAddr, AACAddr>;

inline bool is_halt(const KontAddr& ka) {
  return std::holds_alternative<HaltAddr>(ka);
}

// --- Continuations ------------------------------------------------------------

struct AbsFrame {
  Var bind;
  const Exp* ret = nullptr;
  AbsEnv env;

  friend std::strong_ordering operator<=>(const AbsFrame& a, const AbsFrame& b) {
    if (auto c = a.bind <=> b.bind; c != 0) return c;
    if (auto c = a.ret->label <=> b.ret->label; c != 0) return c;
    return a.env <=> b.env;
  }
  friend bool operator==(const AbsFrame& a, const AbsFrame& b) {
    return (a <=> b) == 0;
  }
};

struct AbsKont {
  AbsFrame frame;
  KontAddr tail;

  friend std::strong_ordering operator<=>(const AbsKont& a, const AbsKont& b) {
    if (auto c = a.frame <=> b.frame; c != 0) return c;
    return a.tail <=> b.tail;
  }
  friend bool operator==(const AbsKont& a, const AbsKont& b) {
    return (a <=> b) == 0;
  }
};

using KontSet = std::set<AbsKont>;
using KStore = std::map<KontAddr, KontSet>;

// --- States and configurations -------------------------------------------------

// Store-less configuration of the widened semantics.
struct Configuration {
  const Exp* exp = nullptr;
  AbsEnv env;
  KontAddr ka;

  friend std::strong_ordering operator<=>(const Configuration& a,
                                          const Configuration& b) {
    if (auto c = a.exp->label <=> b.exp->label; c != 0) return c;
    if (auto c = a.env <=> b.env; c != 0) return c;
    return a.ka <=> b.ka;
  }
  friend bool operator==(const Configuration& a, const Configuration& b) {
    return (a <=> b) == 0;
  }
};

// Full finite state carrying its own stores (the naive, unwidened semantics).
struct AbstractState {
  const Exp* exp = nullptr;
  AbsEnv env;
  Store store;
  KStore kstore;
  KontAddr ka;

  Configuration config() const { return Configuration{exp, env, ka}; }

  friend std::strong_ordering operator<=>(const AbstractState& a,
                                          const AbstractState& b) {
    if (auto c = a.exp->label <=> b.exp->label; c != 0) return c;
    if (auto c = a.env <=> b.env; c != 0) return c;
    if (auto c = a.ka <=> b.ka; c != 0) return c;
    if (auto c = a.store <=> b.store; c != 0) return c;
    return a.kstore <=> b.kstore;
  }
  friend bool operator==(const AbstractState& a, const AbstractState& b) {
    return (a <=> b) == 0;
  }
};

// --- Lattice operations ---------------------------------------------------------

Store store_join(const Store& a, const Store& b);
KStore kstore_join(const KStore& a, const KStore& b);

// In-place joins used on the hot path; report whether anything changed and
// append the changed addresses (for worklist dependency wakeups).
bool store_join_into(Store& dst, const Store& delta,
                     std::vector<AbsAddr>* changed = nullptr);
bool kstore_join_into(KStore& dst, const KStore& delta,
                      std::vector<KontAddr>* changed = nullptr);

// Pointwise order tests (absent key == bottom).
bool store_leq(const Store& a, const Store& b);
bool kstore_leq(const KStore& a, const KStore& b);

// --- Atomic evaluation -----------------------------------------------------------

// Flow set for an atomic expression against an environment and store. Lambda
// closures capture the environment trimmed to their free variables; dead
// variable lookups yield the empty set. When `reads` is non-null, every store
// address consulted (hit or miss) is recorded.
FlowSet abs_atomic_eval(const AtomicExp& ae, const AbsEnv& env,
                        const Store& store, const Program* program = nullptr,
                        std::set<AbsAddr>* reads = nullptr);

AbsEnv trim_env(const AbsEnv& env, const std::set<Var>& keep);

// --- Rendering -------------------------------------------------------------------

std::string to_string(const AbsAddr& a);
std::string to_string(const AbsValue& v);
std::string to_string(const FlowSet& d);
std::string to_string(const AbsEnv& env);
std::string to_string(const KontAddr& ka);
std::string to_string(const AbsFrame& f);
std::string to_string(const Configuration& c);

}  // namespace cfa
