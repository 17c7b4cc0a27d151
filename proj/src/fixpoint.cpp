#include "cfa/fixpoint.hpp"

#include <algorithm>
#include <chrono>
#include <deque>
#include <iterator>

namespace cfa {

namespace {

Configuration initial_config(const Program& p) {
  return Configuration{p.root(), AbsEnv{}, HaltAddr{}};
}

}  // namespace

AnalysisResult widened_transfer(const AnalysisResult& xi, const Program& p,
                                const PolicyPair& policy) {
  StoreInterner interner;
  AnalysisResult out;
  out.store = xi.store;
  out.kstore = xi.kstore;
  out.halt_flows = xi.halt_flows;
  out.metrics = xi.metrics;
  out.reachable.insert(initial_config(p));
  for (const Configuration& c : xi.reachable) {
    out.reachable.insert(c);
    StepOutput step = step_config(p, c, xi.store, xi.kstore, policy, interner);
    out.halt_flows.insert(step.halt_flows.begin(), step.halt_flows.end());
    for (Succession& succ : step.successors) {
      out.reachable.insert(succ.config);
      store_join_into(out.store, succ.store_delta);
      kstore_join_into(out.kstore, succ.kstore_delta);
    }
  }
  out.metrics.configurations = out.reachable.size();
  ++out.metrics.iterations;
  return out;
}

AnalysisResult analyze(const Program& p, const PolicyPair& policy,
                       const AnalyzeOptions& opts) {
  auto start = std::chrono::steady_clock::now();
  StoreInterner interner;
  AnalysisResult xi;

  // Configurations are interned to dense ids; every piece of worklist
  // bookkeeping (queue membership, dependency indices, dirtiness) works on
  // ids so waking thousands of readers costs integer operations, not
  // environment comparisons.
  std::map<Configuration, uint32_t> ids;
  std::vector<const Configuration*> configs;
  std::deque<uint32_t> worklist;
  std::vector<char> queued;
  std::vector<char> dirty;
  std::vector<char> seen;               // stepped at least once
  std::vector<size_t> konts_consumed;   // per id, log prefix already handled
  std::map<AbsAddr, std::set<uint32_t>> value_deps;
  std::map<KontAddr, std::set<uint32_t>> kont_deps;

  // Continuations are logged per address in arrival order so a configuration
  // woken purely by continuation growth re-processes just the new arrivals.
  std::map<KontAddr, std::vector<AbsKont>> kont_log;

  // Return and call transitions cache their successor ids and binding
  // addresses, which do not depend on the delivered flow sets; a revisit
  // joins only flow-set deltas without rebuilding environments. Calls are
  // cacheable only when the continuation allocator ignores the store, which
  // holds for every policy except AAC.
  struct FlowTarget {
    uint32_t succ_id;
    AbsAddr bind_addr;
    enum class Kind { Args, Prim, PrimPartial } kind = Kind::Args;
    Prim op = Prim::Not;
  };
  std::vector<std::vector<FlowTarget>> flow_cache;
  std::vector<FlowSet> delivered;  // per id: flows already joined (d or args)
  std::vector<FlowSet> seen_fns;   // per call id: fn values already expanded
  std::vector<char> uncacheable;   // tail calls that hit a primitive
  const bool calls_cacheable = policy.kont != KontPolicy::AAC;

  auto intern = [&](const Configuration& c) -> std::pair<uint32_t, bool> {
    auto [it, inserted] = ids.emplace(c, static_cast<uint32_t>(configs.size()));
    if (inserted) {
      configs.push_back(&it->first);
      queued.push_back(0);
      dirty.push_back(0);
      seen.push_back(0);
      konts_consumed.push_back(0);
      flow_cache.emplace_back();
      delivered.emplace_back();
      seen_fns.emplace_back();
      uncacheable.push_back(0);
    }
    return {it->second, inserted};
  };

  auto enqueue = [&](uint32_t id) {
    if (queued[id]) return;
    queued[id] = 1;
    worklist.push_back(id);
  };

  auto join_values = [&](const AbsAddr& addr, const FlowSet& d,
                         std::vector<AbsAddr>& changed) {
    if (d.empty()) return;
    FlowSet& target = xi.store[addr];
    size_t before = target.size();
    target.insert(d.begin(), d.end());
    if (target.size() != before) changed.push_back(addr);
  };

  Configuration init = initial_config(p);
  enqueue(intern(init).first);

  while (!worklist.empty()) {
    uint32_t cid;
    if (opts.order == WorklistOrder::Fifo) {
      cid = worklist.front();
      worklist.pop_front();
    } else {
      cid = worklist.back();
      worklist.pop_back();
    }
    queued[cid] = 0;
    const Configuration& c = *configs[cid];

    ++xi.metrics.states_visited;
    if (xi.metrics.states_visited > opts.max_visits)
      throw ResourceLimit("worklist visit ceiling exceeded");

    bool full = !seen[cid] || dirty[cid];
    seen[cid] = 1;
    dirty[cid] = 0;

    size_t log_size = 0;
    if (auto log_it = kont_log.find(c.ka); log_it != kont_log.end())
      log_size = log_it->second.size();

    std::vector<AbsAddr> changed_addrs;
    std::vector<KontAddr> changed_konts;

    const Return* ret_form = c.exp->as_return();
    const LetCall* let_form = c.exp->as_let();
    const TailCall* tail_form = c.exp->as_tail();
    bool cacheable_call =
        calls_cacheable && !uncacheable[cid] && (let_form || tail_form);

    if (ret_form && !is_halt(c.ka)) {
      std::set<AbsAddr> reads;
      FlowSet d = abs_atomic_eval(ret_form->ae, c.env, xi.store, &p, &reads);
      for (const AbsAddr& a : reads) value_deps[a].insert(cid);
      kont_deps[c.ka].insert(cid);

      FlowSet delta;
      std::set_difference(d.begin(), d.end(), delivered[cid].begin(),
                          delivered[cid].end(),
                          std::inserter(delta, delta.end()));

      size_t first_new = flow_cache[cid].size();
      if (auto log_it = kont_log.find(c.ka); log_it != kont_log.end()) {
        const std::vector<AbsKont>& log = log_it->second;
        for (size_t i = konts_consumed[cid]; i < log.size(); ++i) {
          const AbsFrame& frame = log[i].frame;
          AbsAddr addr = value_alloc(policy.value, frame.bind, c.exp->label);
          AbsEnv env = trim_env(frame.env.bind(frame.bind, addr),
                                p.free_vars(frame.ret));
          auto [succ_id, fresh] = intern(
              Configuration{frame.ret, std::move(env), log[i].tail});
          if (fresh) enqueue(succ_id);
          flow_cache[cid].push_back(FlowTarget{succ_id, std::move(addr),
                                               FlowTarget::Kind::Args,
                                               Prim::Not});
        }
      }
      konts_consumed[cid] = log_size;

      const std::vector<FlowTarget>& cache = flow_cache[cid];
      if (!delta.empty()) {
        for (size_t i = 0; i < first_new; ++i) {
          ++xi.metrics.transitions;
          join_values(cache[i].bind_addr, delta, changed_addrs);
        }
      }
      for (size_t i = first_new; i < cache.size(); ++i) {
        ++xi.metrics.transitions;
        join_values(cache[i].bind_addr, d, changed_addrs);
      }
      delivered[cid] = std::move(d);
    } else if (cacheable_call) {
      const AtomicExp& fn_ae = let_form ? let_form->fn : tail_form->fn;
      const AtomicExp& arg_ae = let_form ? let_form->arg : tail_form->arg;
      std::set<AbsAddr> reads;
      FlowSet fns = abs_atomic_eval(fn_ae, c.env, xi.store, &p, &reads);
      FlowSet args = abs_atomic_eval(arg_ae, c.env, xi.store, &p, &reads);
      for (const AbsAddr& a : reads) value_deps[a].insert(cid);

      bool tail_prim = false;
      if (tail_form)
        for (const AbsValue& fn : fns)
          if (!std::holds_alternative<AbsClo>(fn) &&
              (std::holds_alternative<AbsPrim>(fn) ||
               std::holds_alternative<AbsPrimPartial>(fn)))
            tail_prim = true;
      if (tail_prim) {
        // Primitive results in tail position route through the continuation
        // store; such configurations step generically from now on.
        uncacheable[cid] = 1;
        seen_fns[cid].clear();
        delivered[cid].clear();
        flow_cache[cid].clear();
        StepOutput step = step_config(p, c, xi.store, xi.kstore, policy, interner);
        konts_consumed[cid] = log_size;
        xi.metrics.transitions += step.successors.size();
        xi.metrics.dropped_non_callable += step.dropped_non_callable;
        xi.halt_flows.insert(step.halt_flows.begin(), step.halt_flows.end());
        for (const AbsAddr& a : step.value_reads) value_deps[a].insert(cid);
        for (const KontAddr& ka : step.kont_reads) kont_deps[ka].insert(cid);
        for (Succession& succ : step.successors) {
          store_join_into(xi.store, succ.store_delta, &changed_addrs);
          for (const auto& [ka, konts] : succ.kstore_delta) {
            KontSet& target = xi.kstore[ka];
            for (const AbsKont& kont : konts) {
              if (!target.insert(kont).second) continue;
              kont_log[ka].push_back(kont);
              changed_konts.push_back(ka);
            }
          }
          auto [succ_id, fresh] = intern(succ.config);
          if (fresh) enqueue(succ_id);
        }
      } else {
        FlowSet args_delta;
        std::set_difference(args.begin(), args.end(), delivered[cid].begin(),
                            delivered[cid].end(),
                            std::inserter(args_delta, args_delta.end()));

        size_t first_new = flow_cache[cid].size();
        for (const AbsValue& fn : fns) {
          if (seen_fns[cid].count(fn)) continue;
          seen_fns[cid].insert(fn);
          if (const auto* clo = std::get_if<AbsClo>(&fn)) {
            const Lam* lam = clo->lam;
            AbsAddr param_addr =
                value_alloc(policy.value, lam->param, c.exp->label);
            AbsEnv callee_env = trim_env(clo->env.bind(lam->param, param_addr),
                                         p.free_vars(lam->body));
            KontAddr ka = c.ka;
            if (let_form) {
              ka = kont_alloc(policy.kont, c.exp->label, c.env, xi.store,
                              lam->body, callee_env, xi.store, interner);
              std::set<Var> keep = p.free_vars(let_form->body);
              keep.erase(let_form->bind);
              AbsKont kont{AbsFrame{let_form->bind, let_form->body,
                                    trim_env(c.env, keep)},
                           c.ka};
              if (xi.kstore[ka].insert(kont).second) {
                kont_log[ka].push_back(std::move(kont));
                changed_konts.push_back(ka);
              }
            }
            auto [succ_id, fresh] =
                intern(Configuration{lam->body, std::move(callee_env), ka});
            if (fresh) enqueue(succ_id);
            flow_cache[cid].push_back(FlowTarget{succ_id, std::move(param_addr),
                                                 FlowTarget::Kind::Args,
                                                 Prim::Not});
            continue;
          }
          FlowTarget::Kind kind;
          Prim op;
          if (const auto* prim = std::get_if<AbsPrim>(&fn)) {
            kind = FlowTarget::Kind::Prim;
            op = prim->op;
          } else if (const auto* partial = std::get_if<AbsPrimPartial>(&fn)) {
            kind = FlowTarget::Kind::PrimPartial;
            op = partial->op;
          } else {
            ++xi.metrics.dropped_non_callable;
            continue;
          }
          // let-bound primitive: result binds the let variable in place
          AbsAddr addr = value_alloc(policy.value, let_form->bind, c.exp->label);
          AbsEnv env = trim_env(c.env.bind(let_form->bind, addr),
                                p.free_vars(let_form->body));
          auto [succ_id, fresh] =
              intern(Configuration{let_form->body, std::move(env), c.ka});
          if (fresh) enqueue(succ_id);
          flow_cache[cid].push_back(
              FlowTarget{succ_id, std::move(addr), kind, op});
        }
        konts_consumed[cid] = log_size;

        const std::vector<FlowTarget>& cache = flow_cache[cid];
        auto flows_for = [&](const FlowTarget& target,
                             const FlowSet& base) -> FlowSet {
          switch (target.kind) {
            case FlowTarget::Kind::Args: return base;
            case FlowTarget::Kind::Prim: return abs_apply_prim(target.op, base);
            case FlowTarget::Kind::PrimPartial:
              return abs_apply_prim_partial(target.op, base);
          }
          return {};
        };
        if (!args_delta.empty()) {
          for (size_t i = 0; i < first_new; ++i) {
            ++xi.metrics.transitions;
            join_values(cache[i].bind_addr, flows_for(cache[i], args_delta),
                        changed_addrs);
          }
        }
        for (size_t i = first_new; i < cache.size(); ++i) {
          ++xi.metrics.transitions;
          join_values(cache[i].bind_addr, flows_for(cache[i], args),
                      changed_addrs);
        }
        delivered[cid] = std::move(args);
      }
    } else {
      StepOutput step;
      if (full) {
        step = step_config(p, c, xi.store, xi.kstore, policy, interner);
      } else {
        size_t consumed = konts_consumed[cid];
        if (consumed >= log_size) continue;  // nothing new to react to
        KStore slice;
        const std::vector<AbsKont>& log = kont_log.at(c.ka);
        slice[c.ka] =
            KontSet(log.begin() + static_cast<long>(consumed), log.end());
        step = step_config(p, c, xi.store, slice, policy, interner);
      }
      konts_consumed[cid] = log_size;

      xi.metrics.transitions += step.successors.size();
      xi.metrics.dropped_non_callable += step.dropped_non_callable;
      xi.halt_flows.insert(step.halt_flows.begin(), step.halt_flows.end());

      for (const AbsAddr& a : step.value_reads) value_deps[a].insert(cid);
      for (const KontAddr& ka : step.kont_reads) kont_deps[ka].insert(cid);

      for (Succession& succ : step.successors) {
        store_join_into(xi.store, succ.store_delta, &changed_addrs);
        for (const auto& [ka, konts] : succ.kstore_delta) {
          KontSet& target = xi.kstore[ka];
          for (const AbsKont& kont : konts) {
            if (!target.insert(kont).second) continue;
            kont_log[ka].push_back(kont);
            changed_konts.push_back(ka);
          }
        }
        auto [succ_id, fresh] = intern(succ.config);
        if (fresh) enqueue(succ_id);
      }
    }
    if (!changed_addrs.empty() || !changed_konts.empty())
      ++xi.metrics.iterations;

    for (const AbsAddr& a : changed_addrs) {
      auto it = value_deps.find(a);
      if (it == value_deps.end()) continue;
      for (uint32_t reader : it->second) {
        dirty[reader] = 1;
        enqueue(reader);
      }
    }
    for (const KontAddr& ka : changed_konts) {
      auto it = kont_deps.find(ka);
      if (it == kont_deps.end()) continue;
      for (uint32_t reader : it->second) enqueue(reader);
    }

    if (ids.size() > opts.max_configurations)
      throw ResourceLimit("configuration ceiling exceeded");
    if (opts.check_invariants) {
      auto halt_it = xi.kstore.find(KontAddr{HaltAddr{}});
      if (halt_it != xi.kstore.end() && !halt_it->second.empty())
        throw std::logic_error("wf_halt violated: continuations stored at halt");
      if (!ids.count(init))
        throw std::logic_error("wf_init violated: initial configuration dropped");
    }
  }

  for (const auto& [config, id] : ids) {
    (void)id;
    xi.reachable.insert(xi.reachable.end(), config);
  }
  xi.metrics.configurations = xi.reachable.size();
  xi.metrics.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                start)
          .count();
  return xi;
}

std::map<AbsAddr, FlowSet> flow_query(const AnalysisResult& xi,
                                      const Program& p, const Var& x) {
  if (!p.binds(x)) throw UnknownVariable(x);
  std::map<AbsAddr, FlowSet> out;
  for (const auto& [addr, flows] : xi.store) {
    const Var* bound = nullptr;
    if (const auto* m = std::get_if<MonoVar>(&addr)) bound = &m->name;
    else if (const auto* cv = std::get_if<CallVar>(&addr)) bound = &cv->name;
    if (bound && *bound == x) out.emplace(addr, flows);
  }
  return out;
}

std::set<AbstractState> naive_collect(const Program& p,
                                      const PolicyPair& policy,
                                      uint64_t state_limit) {
  StoreInterner interner;
  std::set<AbstractState> seen;
  std::deque<AbstractState> worklist;
  AbstractState init = abs_inject(p);
  seen.insert(init);
  worklist.push_back(std::move(init));
  while (!worklist.empty()) {
    AbstractState state = std::move(worklist.front());
    worklist.pop_front();
    for (const AbstractState& succ : abs_step(p, state, policy, interner)) {
      if (!seen.insert(succ).second) continue;
      worklist.push_back(succ);
      if (seen.size() > state_limit)
        throw ResourceLimit("naive collecting state ceiling exceeded");
    }
  }
  return seen;
}

}  // namespace cfa
