#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "cfa/syntax.hpp"

// Exact CESK interpreter used as ground truth for soundness checks.

namespace cfa {

struct CAddr {
  uint64_t serial = 0;
  auto operator<=>(const CAddr&) const = default;
};

using CEnv = std::map<Var, CAddr>;

struct CClo {
  const Lam* lam = nullptr;
  CEnv env;
};
struct CBool {
  bool value = false;
};
struct CNum {
  int64_t value = 0;
};
struct CPrim {
  Prim op;
};
struct CPrimPartial {
  Prim op;
  int64_t lhs = 0;
};

using CValue = std::variant<CClo, CBool, CNum, CPrim, CPrimPartial>;

using CStore = std::map<CAddr, CValue>;

struct CFrame {
  Var bind;
  const Exp* ret = nullptr;
  CEnv env;
};

using CKont = std::vector<CFrame>;  // top frame first

struct CState {
  const Exp* exp = nullptr;
  CEnv env;
  CStore store;
  CKont kont;
  uint64_t next_addr = 0;
};

struct UnboundVariable : std::runtime_error {
  explicit UnboundVariable(const Var& name)
      : std::runtime_error("unbound variable at runtime: " + name) {}
};

struct Halted {
  CValue value;
};
struct Stuck {
  std::string reason;
};
struct Next {
  CState state;
};
using StepResult = std::variant<Next, Halted, Stuck>;

// One concrete binding x := v performed while transitioning out of the state
// whose expression carries `site`. Soundness tests map (var, site) through a
// value policy to an abstract address.
struct BindingEvent {
  Var var;
  Label site;
  CAddr addr;
  CValue value;
};

enum class RunStatus { Halted, Stuck, StepLimit };

struct RunResult {
  std::vector<CState> trace;
  RunStatus status = RunStatus::StepLimit;
  CValue final_value;        // meaningful when status == Halted
  std::string stuck_reason;  // meaningful when status == Stuck
  std::vector<BindingEvent> bindings;
};

CValue concrete_atomic_eval(const AtomicExp& ae, const CEnv& env,
                            const CStore& store);

CState inject_concrete(const Program& p);

StepResult concrete_step(const CState& s,
                         std::vector<BindingEvent>* bindings = nullptr);

inline constexpr uint64_t kDefaultStepLimit = 1'000'000;

RunResult concrete_run(const Program& p, uint64_t step_limit = kDefaultStepLimit);

// JSON-lines trace export: one object per state with
// {label, env, store_delta, kont_depth}.
std::string trace_to_json_lines(const RunResult& run);

std::string to_string(const CValue& v);

}  // namespace cfa
