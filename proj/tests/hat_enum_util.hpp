#pragma once

#include <utility>
#include <vector>

#include "cfa/oracle.hpp"

// Test-local re-implementation of the unbounded-stack step: used to re-derive
// Dyck edges and stack-delta discipline independently of the library path.

namespace cfa::testutil {

inline std::vector<std::pair<HatConfig, int>> enum_steps(const Program& p,
                                                         const HatConfig& c,
                                                         const Store& store,
                                                         ValuePolicy vp) {
  std::vector<std::pair<HatConfig, int>> out;
  auto push_succ = [&](const Exp* e, AbsEnv env, std::vector<AbsFrame> kont,
                       int delta) {
    out.push_back({HatConfig{e, trim_env(env, p.free_vars(e)), std::move(kont)},
                   delta});
  };
  auto enter = [&](const AbsValue& fn, const FlowSet& args, Label site,
                   const LetCall* let) {
    if (const auto* clo = std::get_if<AbsClo>(&fn)) {
      AbsAddr a = value_alloc(vp, clo->lam->param, site);
      std::vector<AbsFrame> kont = c.kont;
      int delta = 0;
      if (let) {
        std::set<Var> keep = p.free_vars(let->body);
        keep.erase(let->bind);
        kont.insert(kont.begin(),
                    AbsFrame{let->bind, let->body, trim_env(c.env, keep)});
        delta = 1;
      }
      push_succ(clo->lam->body, clo->env.bind(clo->lam->param, a),
                std::move(kont), delta);
      return;
    }
    FlowSet result;
    if (const auto* pr = std::get_if<AbsPrim>(&fn))
      result = abs_apply_prim(pr->op, args);
    else if (const auto* pp = std::get_if<AbsPrimPartial>(&fn))
      result = abs_apply_prim_partial(pp->op, args);
    else
      return;
    if (let) {
      AbsAddr a = value_alloc(vp, let->bind, site);
      push_succ(let->body, c.env.bind(let->bind, a), c.kont, 0);
    } else if (!c.kont.empty()) {
      const AbsFrame& f = c.kont.front();
      AbsAddr a = value_alloc(vp, f.bind, site);
      push_succ(f.ret, f.env.bind(f.bind, a),
                {c.kont.begin() + 1, c.kont.end()}, -1);
    }
  };

  if (const auto* let = c.exp->as_let()) {
    FlowSet fns = abs_atomic_eval(let->fn, c.env, store, &p);
    FlowSet args = abs_atomic_eval(let->arg, c.env, store, &p);
    for (const AbsValue& fn : fns) enter(fn, args, c.exp->label, let);
  } else if (c.exp->as_return()) {
    if (!c.kont.empty()) {
      const AbsFrame& f = c.kont.front();
      AbsAddr a = value_alloc(vp, f.bind, c.exp->label);
      push_succ(f.ret, f.env.bind(f.bind, a),
                {c.kont.begin() + 1, c.kont.end()}, -1);
    }
  } else if (const auto* i = c.exp->as_if()) {
    FlowSet d = abs_atomic_eval(i->cond, c.env, store, &p);
    bool num = d.count(AbsValue{AbsNum{}}) != 0;
    if (d.count(AbsValue{AbsBool{true}}) || num)
      push_succ(i->then_branch, c.env, c.kont, 0);
    if (d.count(AbsValue{AbsBool{false}}) || num)
      push_succ(i->else_branch, c.env, c.kont, 0);
  } else if (const auto* t = c.exp->as_tail()) {
    FlowSet fns = abs_atomic_eval(t->fn, c.env, store, &p);
    FlowSet args = abs_atomic_eval(t->arg, c.env, store, &p);
    for (const AbsValue& fn : fns) enter(fn, args, c.exp->label, nullptr);
  }
  return out;
}

}  // namespace cfa::testutil
