#include "cfa/oracle.hpp"

#include <chrono>
#include <deque>
#include <sstream>

namespace cfa {

namespace {

struct HatSuccession {
  HatConfig config;
  Store store_delta;
};

struct HatStepOutput {
  std::vector<HatSuccession> successors;
  FlowSet halt_flows;
  std::set<AbsAddr> value_reads;
  uint64_t dropped_non_callable = 0;
};

void hat_deliver(const Program& p, const HatConfig& c, const FlowSet& d,
                 ValuePolicy vp, HatStepOutput& out) {
  if (c.kont.empty()) {
    out.halt_flows.insert(d.begin(), d.end());
    return;
  }
  const AbsFrame& frame = c.kont.front();
  AbsAddr addr = value_alloc(vp, frame.bind, c.exp->label);
  AbsEnv env =
      trim_env(frame.env.bind(frame.bind, addr), p.free_vars(frame.ret));
  HatSuccession succ;
  succ.config.exp = frame.ret;
  succ.config.env = std::move(env);
  succ.config.kont.assign(c.kont.begin() + 1, c.kont.end());
  if (!d.empty()) succ.store_delta[addr] = d;
  out.successors.push_back(std::move(succ));
}

void hat_apply(const Program& p, const HatConfig& c, const FlowSet& fns,
               const FlowSet& args, const LetCall* let_form, ValuePolicy vp,
               HatStepOutput& out) {
  for (const AbsValue& fn : fns) {
    if (const auto* clo = std::get_if<AbsClo>(&fn)) {
      const Lam* lam = clo->lam;
      AbsAddr param_addr = value_alloc(vp, lam->param, c.exp->label);
      AbsEnv callee_env = trim_env(clo->env.bind(lam->param, param_addr),
                                   p.free_vars(lam->body));
      HatSuccession succ;
      succ.config.exp = lam->body;
      succ.config.env = std::move(callee_env);
      succ.config.kont = c.kont;
      if (let_form) {
        std::set<Var> keep = p.free_vars(let_form->body);
        keep.erase(let_form->bind);
        succ.config.kont.insert(
            succ.config.kont.begin(),
            AbsFrame{let_form->bind, let_form->body, trim_env(c.env, keep)});
      }
      if (!args.empty()) succ.store_delta[param_addr] = args;
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
      AbsAddr addr = value_alloc(vp, let_form->bind, c.exp->label);
      AbsEnv env = trim_env(c.env.bind(let_form->bind, addr),
                            p.free_vars(let_form->body));
      HatSuccession succ;
      succ.config.exp = let_form->body;
      succ.config.env = std::move(env);
      succ.config.kont = c.kont;
      if (!result.empty()) succ.store_delta[addr] = result;
      out.successors.push_back(std::move(succ));
    } else {
      hat_deliver(p, c, result, vp, out);
    }
  }
}

HatStepOutput hat_step(const Program& p, const HatConfig& c, const Store& store,
                       ValuePolicy vp) {
  HatStepOutput out;
  if (const auto* let = c.exp->as_let()) {
    FlowSet fns = abs_atomic_eval(let->fn, c.env, store, &p, &out.value_reads);
    FlowSet args = abs_atomic_eval(let->arg, c.env, store, &p, &out.value_reads);
    hat_apply(p, c, fns, args, let, vp, out);
    return out;
  }
  if (const auto* r = c.exp->as_return()) {
    FlowSet d = abs_atomic_eval(r->ae, c.env, store, &p, &out.value_reads);
    hat_deliver(p, c, d, vp, out);
    return out;
  }
  if (const auto* i = c.exp->as_if()) {
    FlowSet d = abs_atomic_eval(i->cond, c.env, store, &p, &out.value_reads);
    bool num = d.count(AbsValue{AbsNum{}}) != 0;
    if (d.count(AbsValue{AbsBool{true}}) || num) {
      HatSuccession succ;
      succ.config = HatConfig{i->then_branch,
                              trim_env(c.env, p.free_vars(i->then_branch)),
                              c.kont};
      out.successors.push_back(std::move(succ));
    }
    if (d.count(AbsValue{AbsBool{false}}) || num) {
      HatSuccession succ;
      succ.config = HatConfig{i->else_branch,
                              trim_env(c.env, p.free_vars(i->else_branch)),
                              c.kont};
      out.successors.push_back(std::move(succ));
    }
    return out;
  }
  const auto* t = c.exp->as_tail();
  FlowSet fns = abs_atomic_eval(t->fn, c.env, store, &p, &out.value_reads);
  FlowSet args = abs_atomic_eval(t->arg, c.env, store, &p, &out.value_reads);
  hat_apply(p, c, fns, args, nullptr, vp, out);
  return out;
}

}  // namespace

OracleResult oracle_analyze(const Program& p, ValuePolicy value_policy,
                            uint32_t depth_bound, const OracleOptions& opts) {
  auto start = std::chrono::steady_clock::now();
  OracleResult xi;
  xi.depth_bound = depth_bound;
  xi.complete = true;
  xi.program = &p;
  xi.value_policy = value_policy;

  HatConfig init{p.root(), AbsEnv{}, {}};
  xi.reachable.insert(init);

  std::deque<HatConfig> worklist{init};
  std::set<HatConfig> queued{init};
  std::map<AbsAddr, std::set<HatConfig>> value_deps;

  auto enqueue = [&](const HatConfig& c) {
    if (queued.insert(c).second) worklist.push_back(c);
  };

  while (!worklist.empty()) {
    HatConfig c = std::move(worklist.front());
    worklist.pop_front();
    queued.erase(c);

    if (c.kont.size() > depth_bound) {
      xi.complete = false;  // reached but not expanded
      continue;
    }
    ++xi.metrics.states_visited;

    HatStepOutput step = hat_step(p, c, xi.store, value_policy);
    xi.metrics.transitions += step.successors.size();
    xi.metrics.dropped_non_callable += step.dropped_non_callable;
    xi.halt_flows.insert(step.halt_flows.begin(), step.halt_flows.end());

    for (const AbsAddr& a : step.value_reads) value_deps[a].insert(c);

    std::vector<AbsAddr> changed;
    for (HatSuccession& succ : step.successors) {
      store_join_into(xi.store, succ.store_delta, &changed);
      if (xi.reachable.insert(succ.config).second) enqueue(succ.config);
    }
    if (!changed.empty()) ++xi.metrics.iterations;
    for (const AbsAddr& a : changed) {
      auto it = value_deps.find(a);
      if (it == value_deps.end()) continue;
      for (const HatConfig& reader : it->second) enqueue(reader);
    }
    if (xi.reachable.size() > opts.max_configurations)
      throw ResourceLimit("oracle configuration ceiling exceeded");
  }

  xi.metrics.configurations = xi.reachable.size();
  xi.metrics.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                start)
          .count();
  return xi;
}

DyckGraph dsg_extract(const OracleResult& oracle) {
  if (!oracle.complete)
    throw IncompleteOracle("Dyck graph extraction needs a complete oracle");
  const Program& p = *oracle.program;
  DyckGraph g;
  for (const HatConfig& c : oracle.reachable)
    g.vertices.insert(DyckVertex{c.exp, c.env});
  for (const HatConfig& c : oracle.reachable) {
    HatStepOutput step = hat_step(p, c, oracle.store, oracle.value_policy);
    for (const HatSuccession& succ : step.successors) {
      const HatConfig& next = succ.config;
      if (next.kont.size() == c.kont.size() + 1) {
        g.edges.insert(DyckEdge{DyckVertex{c.exp, c.env}, StackAction::Push,
                                next.kont.front(),
                                DyckVertex{next.exp, next.env}});
      } else if (next.kont.size() + 1 == c.kont.size()) {
        g.edges.insert(DyckEdge{DyckVertex{c.exp, c.env}, StackAction::Pop,
                                c.kont.front(),
                                DyckVertex{next.exp, next.env}});
      }
    }
  }
  return g;
}

namespace {

uint32_t env_hash(const AbsEnv& env) {
  uint32_t h = 2166136261u;
  for (char ch : to_string(env)) {
    h ^= static_cast<unsigned char>(ch);
    h *= 16777619u;
  }
  return h;
}

std::string vertex_id(const DyckVertex& v) {
  std::ostringstream out;
  out << v.exp->label.id << "@" << std::hex << env_hash(v.env);
  return out.str();
}

}  // namespace

std::string dsg_to_dot(const DyckGraph& g) {
  std::ostringstream out;
  out << "digraph dsg {\n";
  for (const DyckVertex& v : g.vertices)
    out << "  \"" << vertex_id(v) << "\";\n";
  for (const DyckEdge& e : g.edges) {
    out << "  \"" << vertex_id(e.src) << "\" -> \"" << vertex_id(e.dst)
        << "\" [label=\"" << (e.action == StackAction::Push ? "+" : "-")
        << e.frame.bind << "@e" << e.frame.ret->label.id << "\"];\n";
  }
  out << "}\n";
  return out.str();
}

namespace {

using MemoKey = std::pair<KontAddr, uint32_t>;

const ImpliedStacks& stacks_from(const KontAddr& ka, const KStore& kstore,
                                 uint32_t budget,
                                 std::map<MemoKey, ImpliedStacks>& memo) {
  MemoKey key{ka, budget};
  auto found = memo.find(key);
  if (found != memo.end()) return found->second;

  ImpliedStacks result;
  if (is_halt(ka)) {
    result.stacks.insert(ImpliedStack{});
  } else {
    auto it = kstore.find(ka);
    if (it != kstore.end() && !it->second.empty()) {
      if (budget == 0) {
        result.exhausted = false;  // chain cut at the bound
      } else {
        for (const AbsKont& kont : it->second) {
          const ImpliedStacks& sub =
              stacks_from(kont.tail, kstore, budget - 1, memo);
          if (!sub.exhausted) result.exhausted = false;
          for (const ImpliedStack& tail_stack : sub.stacks) {
            ImpliedStack stack;
            stack.reserve(tail_stack.size() + 1);
            stack.push_back(kont);
            stack.insert(stack.end(), tail_stack.begin(), tail_stack.end());
            result.stacks.insert(std::move(stack));
          }
        }
      }
    }
    // An address with no stored continuations implies no stacks at all.
  }
  return memo.emplace(std::move(key), std::move(result)).first->second;
}

}  // namespace

ImpliedStacks implied_stacks(const KontAddr& ka, const KStore& kstore,
                             uint32_t depth_bound) {
  std::map<MemoKey, ImpliedStacks> memo;
  return stacks_from(ka, kstore, depth_bound, memo);
}

std::vector<AbsFrame> concretize_stack(const ImpliedStack& stack) {
  std::vector<AbsFrame> frames;
  frames.reserve(stack.size());
  for (const AbsKont& kont : stack) frames.push_back(kont.frame);
  return frames;
}

HatConfig concretize_config(const Configuration& c, const ImpliedStack& stack) {
  return HatConfig{c.exp, c.env, concretize_stack(stack)};
}

PrecisionReport precision_check(const AnalysisResult& xi,
                                const OracleResult& oracle,
                                uint32_t depth_bound) {
  if (!oracle.complete)
    throw IncompleteOracle("precision check needs a complete oracle");
  PrecisionReport report;
  report.oracle_complete = oracle.complete;

  for (const Configuration& c : xi.reachable) {
    ImpliedStacks is = implied_stacks(c.ka, xi.kstore, depth_bound);
    if (!is.exhausted) ++report.residual_chains;
    for (const ImpliedStack& stack : is.stacks) {
      ++report.checked_pairs;
      HatConfig hat = concretize_config(c, stack);
      if (!oracle.reachable.count(hat)) {
        PrecisionViolation v;
        v.kind = PrecisionViolation::Kind::MissingConfig;
        v.config = c;
        v.stack = stack;
        v.missing = std::move(hat);
        report.violations.push_back(std::move(v));
      }
    }
  }

  for (const auto& [addr, flows] : xi.store) {
    auto it = oracle.store.find(addr);
    FlowSet excess;
    for (const AbsValue& v : flows)
      if (it == oracle.store.end() || !it->second.count(v)) excess.insert(v);
    if (!excess.empty()) {
      PrecisionViolation v;
      v.kind = PrecisionViolation::Kind::StoreExcess;
      v.addr = addr;
      v.excess = std::move(excess);
      report.violations.push_back(std::move(v));
    }
  }
  return report;
}

std::string to_string(const HatConfig& c) {
  std::ostringstream out;
  out << "(e" << c.exp->label.id << "," << to_string(c.env) << ",[";
  bool first = true;
  for (const AbsFrame& f : c.kont) {
    if (!first) out << ",";
    first = false;
    out << to_string(f);
  }
  out << "])";
  return out.str();
}

}  // namespace cfa
