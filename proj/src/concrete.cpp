#include "cfa/concrete.hpp"

#include <cassert>
#include <optional>
#include <sstream>

namespace cfa {

namespace {

// Debug-build hygiene: free variables resolve through the environment into
// the store.
[[maybe_unused]] bool state_well_formed(const CState& s) {
  for (const Var& x : free_vars(s.exp)) {
    auto it = s.env.find(x);
    if (it == s.env.end() || !s.store.count(it->second)) return false;
  }
  return true;
}

CAddr fresh(CState& s) { return CAddr{s.next_addr++}; }

void bind(CState& s, const Var& x, CValue v, Label site,
          std::vector<BindingEvent>* log) {
  CAddr a = fresh(s);
  s.env[x] = a;
  if (log) log->push_back({x, site, a, v});
  s.store.emplace(a, std::move(v));
}

// Delta function for primitives. Unary prims produce a value directly;
// binary prims curry through CPrimPartial. Returns nullopt on a type error,
// which the caller reports as a stuck state.
std::optional<CValue> apply_prim(Prim op, const CValue& arg) {
  switch (op) {
    case Prim::Not:
      if (const auto* b = std::get_if<CBool>(&arg)) return CValue{CBool{!b->value}};
      return std::nullopt;
    case Prim::Add1:
      if (const auto* n = std::get_if<CNum>(&arg)) return CValue{CNum{n->value + 1}};
      return std::nullopt;
    case Prim::Sub1:
      if (const auto* n = std::get_if<CNum>(&arg)) return CValue{CNum{n->value - 1}};
      return std::nullopt;
    case Prim::IsZero:
      if (const auto* n = std::get_if<CNum>(&arg)) return CValue{CBool{n->value == 0}};
      return std::nullopt;
    case Prim::Add:
    case Prim::Sub:
    case Prim::Mul:
      if (const auto* n = std::get_if<CNum>(&arg))
        return CValue{CPrimPartial{op, n->value}};
      return std::nullopt;
  }
  return std::nullopt;
}

std::optional<CValue> apply_prim_partial(const CPrimPartial& pp, const CValue& arg) {
  const auto* n = std::get_if<CNum>(&arg);
  if (!n) return std::nullopt;
  switch (pp.op) {
    case Prim::Add: return CValue{CNum{pp.lhs + n->value}};
    case Prim::Sub: return CValue{CNum{pp.lhs - n->value}};
    case Prim::Mul: return CValue{CNum{pp.lhs * n->value}};
    default: return std::nullopt;
  }
}

// Delivers a computed value to the current continuation: pops the top frame
// or halts on the empty stack.
StepResult deliver(CState s, CValue v, Label site, std::vector<BindingEvent>* log) {
  if (s.kont.empty()) return Halted{std::move(v)};
  CFrame frame = s.kont.front();
  s.kont.erase(s.kont.begin());
  s.env = frame.env;
  s.exp = frame.ret;
  bind(s, frame.bind, std::move(v), site, log);
  return Next{std::move(s)};
}

// Applies a callable to an argument. push_frame is set for let calls (which
// return to the let body) and empty for tail calls.
StepResult apply(CState s, const CValue& fn, CValue arg, Label site,
                 std::optional<CFrame> push_frame, std::vector<BindingEvent>* log) {
  if (const auto* clo = std::get_if<CClo>(&fn)) {
    if (push_frame) s.kont.insert(s.kont.begin(), std::move(*push_frame));
    s.env = clo->env;
    s.exp = clo->lam->body;
    bind(s, clo->lam->param, std::move(arg), site, log);
    return Next{std::move(s)};
  }
  std::optional<CValue> result;
  if (const auto* p = std::get_if<CPrim>(&fn)) result = apply_prim(p->op, arg);
  else if (const auto* pp = std::get_if<CPrimPartial>(&fn))
    result = apply_prim_partial(*pp, arg);
  else
    return Stuck{"fn position is not callable: " + to_string(fn)};
  if (!result) return Stuck{"primitive type error: " + to_string(fn) + " applied to " + to_string(arg)};
  if (push_frame) {
    // Primitive result binds the let variable directly; no frame survives.
    s.exp = push_frame->ret;
    bind(s, push_frame->bind, std::move(*result), site, log);
    return Next{std::move(s)};
  }
  return deliver(std::move(s), std::move(*result), site, log);
}

}  // namespace

CValue concrete_atomic_eval(const AtomicExp& ae, const CEnv& env,
                            const CStore& store) {
  if (const auto* v = std::get_if<VarRef>(&ae)) {
    auto it = env.find(v->name);
    if (it == env.end()) throw UnboundVariable(v->name);
    auto sit = store.find(it->second);
    if (sit == store.end()) throw UnboundVariable(v->name);
    return sit->second;
  }
  if (const auto* lam = std::get_if<const Lam*>(&ae)) return CClo{*lam, env};
  if (const auto* b = std::get_if<BoolLit>(&ae)) return CBool{b->value};
  if (const auto* n = std::get_if<NumLit>(&ae)) return CNum{n->value};
  return CPrim{std::get<PrimRef>(ae).op};
}

CState inject_concrete(const Program& p) {
  return CState{p.root(), {}, {}, {}, 0};
}

StepResult concrete_step(const CState& s, std::vector<BindingEvent>* log) {
  assert(state_well_formed(s));
  Label site = s.exp->label;
  if (const auto* let = s.exp->as_let()) {
    CValue fn = concrete_atomic_eval(let->fn, s.env, s.store);
    CValue arg = concrete_atomic_eval(let->arg, s.env, s.store);
    CFrame frame{let->bind, let->body, s.env};
    return apply(s, fn, std::move(arg), site, std::move(frame), log);
  }
  if (const auto* r = s.exp->as_return()) {
    CValue v = concrete_atomic_eval(r->ae, s.env, s.store);
    return deliver(s, std::move(v), site, log);
  }
  if (const auto* i = s.exp->as_if()) {
    CValue c = concrete_atomic_eval(i->cond, s.env, s.store);
    const auto* b = std::get_if<CBool>(&c);
    if (!b) return Stuck{"if condition is not a boolean: " + to_string(c)};
    CState next = s;
    next.exp = b->value ? i->then_branch : i->else_branch;
    return Next{std::move(next)};
  }
  const auto* t = s.exp->as_tail();
  CValue fn = concrete_atomic_eval(t->fn, s.env, s.store);
  CValue arg = concrete_atomic_eval(t->arg, s.env, s.store);
  return apply(s, fn, std::move(arg), site, std::nullopt, log);
}

RunResult concrete_run(const Program& p, uint64_t step_limit) {
  RunResult run;
  CState state = inject_concrete(p);
  for (uint64_t i = 0; i < step_limit; ++i) {
    run.trace.push_back(state);
    StepResult r = concrete_step(state, &run.bindings);
    if (const auto* halted = std::get_if<Halted>(&r)) {
      run.status = RunStatus::Halted;
      run.final_value = halted->value;
      return run;
    }
    if (const auto* stuck = std::get_if<Stuck>(&r)) {
      run.status = RunStatus::Stuck;
      run.stuck_reason = stuck->reason;
      return run;
    }
    state = std::move(std::get<Next>(r).state);
  }
  run.status = RunStatus::StepLimit;
  return run;
}

std::string to_string(const CValue& v) {
  if (const auto* clo = std::get_if<CClo>(&v))
    return "clo@" + std::to_string(clo->lam->id);
  if (const auto* b = std::get_if<CBool>(&v)) return b->value ? "#t" : "#f";
  if (const auto* n = std::get_if<CNum>(&v)) return std::to_string(n->value);
  if (const auto* p = std::get_if<CPrim>(&v))
    return "prim:" + std::string(prim_name(p->op));
  const auto& pp = std::get<CPrimPartial>(v);
  return "partial:" + std::string(prim_name(pp.op)) + ":" + std::to_string(pp.lhs);
}

std::string trace_to_json_lines(const RunResult& run) {
  std::ostringstream out;
  CStore prev;
  for (const CState& s : run.trace) {
    out << "{\"label\":" << s.exp->label.id << ",\"env\":{";
    bool first = true;
    for (const auto& [x, a] : s.env) {
      if (!first) out << ",";
      first = false;
      out << "\"" << x << "\":" << a.serial;
    }
    out << "},\"store_delta\":{";
    first = true;
    for (const auto& [a, v] : s.store) {
      if (prev.count(a)) continue;
      if (!first) out << ",";
      first = false;
      out << "\"" << a.serial << "\":\"" << to_string(v) << "\"";
    }
    out << "},\"kont_depth\":" << s.kont.size() << "}\n";
    prev = s.store;
  }
  return out.str();
}

}  // namespace cfa
