#include "cfa/machine.hpp"

#include <algorithm>

namespace cfa {

namespace {

bool contains_bool(const FlowSet& d, bool value) {
  return d.count(AbsValue{AbsBool{value}}) != 0;
}

bool contains_num(const FlowSet& d) { return d.count(AbsValue{AbsNum{}}) != 0; }

// Records addr |-> d in the delta unless the base store already covers it;
// re-processed configurations then cost no flow-set copies.
void add_binding(Store& delta, const Store& base, const AbsAddr& addr,
                 const FlowSet& d) {
  if (d.empty()) return;
  auto it = base.find(addr);
  if (it != base.end() && std::includes(it->second.begin(), it->second.end(),
                                        d.begin(), d.end()))
    return;
  delta[addr] = d;
}

void add_kont(KStore& delta, const KStore& base, const KontAddr& ka,
              AbsKont kont) {
  auto it = base.find(ka);
  if (it != base.end() && it->second.count(kont)) return;
  delta[ka].insert(std::move(kont));
}

// Delivers a flow set to the continuation at `ka`: one successor per stored
// continuation, or halt flows when ka is the halt address.
void deliver(const Program& p, const Configuration& c, const FlowSet& d,
             const PolicyPair& policy, const Store& store, const KStore& kstore,
             StepOutput& out) {
  if (is_halt(c.ka)) {
    out.halt_flows.insert(d.begin(), d.end());
    return;
  }
  out.kont_reads.insert(c.ka);
  auto it = kstore.find(c.ka);
  if (it == kstore.end()) return;
  for (const AbsKont& kont : it->second) {
    const AbsFrame& frame = kont.frame;
    AbsAddr addr = value_alloc(policy.value, frame.bind, c.exp->label);
    AbsEnv env =
        trim_env(frame.env.bind(frame.bind, addr), p.free_vars(frame.ret));
    Succession succ;
    succ.config = Configuration{frame.ret, std::move(env), kont.tail};
    add_binding(succ.store_delta, store, addr, d);
    out.successors.push_back(std::move(succ));
  }
}

// Applies every value flowing to a call's function position. When let_form is
// non-null the call returns to the let body through a pushed continuation;
// otherwise it is a tail call.
void apply_flows(const Program& p, const Configuration& c, const FlowSet& fns,
                 const FlowSet& args, const LetCall* let_form,
                 const Store& store, const KStore& kstore,
                 const PolicyPair& policy, StoreInterner& interner,
                 StepOutput& out) {
  for (const AbsValue& fn : fns) {
    if (const auto* clo = std::get_if<AbsClo>(&fn)) {
      const Lam* lam = clo->lam;
      AbsAddr param_addr = value_alloc(policy.value, lam->param, c.exp->label);
      AbsEnv callee_env = trim_env(clo->env.bind(lam->param, param_addr),
                                   p.free_vars(lam->body));
      Succession succ;
      add_binding(succ.store_delta, store, param_addr, args);
      KontAddr ka = c.ka;
      if (let_form) {
        Store extended = store;
        store_join_into(extended, succ.store_delta);
        ka = kont_alloc(policy.kont, c.exp->label, c.env, store, lam->body,
                        callee_env, extended, interner);
        std::set<Var> frame_keep = p.free_vars(let_form->body);
        frame_keep.erase(let_form->bind);
        AbsFrame frame{let_form->bind, let_form->body,
                       trim_env(c.env, frame_keep)};
        add_kont(succ.kstore_delta, kstore, ka, AbsKont{std::move(frame), c.ka});
      }
      succ.config = Configuration{lam->body, std::move(callee_env), ka};
      out.successors.push_back(std::move(succ));
      continue;
    }
    FlowSet result;
    if (const auto* prim = std::get_if<AbsPrim>(&fn))
      result = abs_apply_prim(prim->op, args);
    else if (const auto* partial = std::get_if<AbsPrimPartial>(&fn))
      result = abs_apply_prim_partial(partial->op, args);
    else {
      ++out.dropped_non_callable;
      continue;
    }
    if (let_form) {
      // Primitive result binds the let variable in a single transition.
      AbsAddr addr = value_alloc(policy.value, let_form->bind, c.exp->label);
      AbsEnv env = trim_env(c.env.bind(let_form->bind, addr),
                            p.free_vars(let_form->body));
      Succession succ;
      succ.config = Configuration{let_form->body, std::move(env), c.ka};
      add_binding(succ.store_delta, store, addr, result);
      out.successors.push_back(std::move(succ));
    } else {
      deliver(p, c, result, policy, store, kstore, out);
    }
  }
}

}  // namespace

FlowSet abs_apply_prim(Prim op, const FlowSet& args) {
  FlowSet out;
  for (const AbsValue& v : args) {
    switch (op) {
      case Prim::Not:
        if (const auto* b = std::get_if<AbsBool>(&v))
          out.insert(AbsValue{AbsBool{!b->value}});
        break;
      case Prim::Add1:
      case Prim::Sub1:
        if (std::holds_alternative<AbsNum>(v)) out.insert(AbsValue{AbsNum{}});
        break;
      case Prim::IsZero:
        if (std::holds_alternative<AbsNum>(v)) {
          out.insert(AbsValue{AbsBool{true}});
          out.insert(AbsValue{AbsBool{false}});
        }
        break;
      case Prim::Add:
      case Prim::Sub:
      case Prim::Mul:
        if (std::holds_alternative<AbsNum>(v))
          out.insert(AbsValue{AbsPrimPartial{op}});
        break;
    }
  }
  return out;
}

FlowSet abs_apply_prim_partial(Prim op, const FlowSet& args) {
  FlowSet out;
  if (op != Prim::Add && op != Prim::Sub && op != Prim::Mul) return out;
  for (const AbsValue& v : args)
    if (std::holds_alternative<AbsNum>(v)) out.insert(AbsValue{AbsNum{}});
  return out;
}

StepOutput step_config(const Program& p, const Configuration& c,
                       const Store& store, const KStore& kstore,
                       const PolicyPair& policy, StoreInterner& interner) {
  StepOutput out;
  if (const auto* let = c.exp->as_let()) {
    FlowSet fns = abs_atomic_eval(let->fn, c.env, store, &p, &out.value_reads);
    FlowSet args = abs_atomic_eval(let->arg, c.env, store, &p, &out.value_reads);
    apply_flows(p, c, fns, args, let, store, kstore, policy, interner, out);
    return out;
  }
  if (const auto* r = c.exp->as_return()) {
    FlowSet d = abs_atomic_eval(r->ae, c.env, store, &p, &out.value_reads);
    deliver(p, c, d, policy, store, kstore, out);
    return out;
  }
  if (const auto* i = c.exp->as_if()) {
    FlowSet d = abs_atomic_eval(i->cond, c.env, store, &p, &out.value_reads);
    bool num = contains_num(d);
    if (contains_bool(d, true) || num) {
      Succession succ;
      succ.config = Configuration{
          i->then_branch, trim_env(c.env, p.free_vars(i->then_branch)), c.ka};
      out.successors.push_back(std::move(succ));
    }
    if (contains_bool(d, false) || num) {
      Succession succ;
      succ.config = Configuration{
          i->else_branch, trim_env(c.env, p.free_vars(i->else_branch)), c.ka};
      out.successors.push_back(std::move(succ));
    }
    return out;
  }
  const auto* t = c.exp->as_tail();
  FlowSet fns = abs_atomic_eval(t->fn, c.env, store, &p, &out.value_reads);
  FlowSet args = abs_atomic_eval(t->arg, c.env, store, &p, &out.value_reads);
  apply_flows(p, c, fns, args, nullptr, store, kstore, policy, interner, out);
  return out;
}

AbstractState abs_inject(const Program& p) {
  return AbstractState{p.root(), AbsEnv{}, Store{}, KStore{}, HaltAddr{}};
}

std::set<AbstractState> abs_step(const Program& p, const AbstractState& state,
                                 const PolicyPair& policy,
                                 StoreInterner& interner) {
  StepOutput out = step_config(p, state.config(), state.store, state.kstore,
                               policy, interner);
  std::set<AbstractState> result;
  for (const Succession& succ : out.successors) {
    AbstractState next;
    next.exp = succ.config.exp;
    next.env = succ.config.env;
    next.ka = succ.config.ka;
    next.store = store_join(state.store, succ.store_delta);
    next.kstore = kstore_join(state.kstore, succ.kstore_delta);
    result.insert(std::move(next));
  }
  return result;
}

}  // namespace cfa
