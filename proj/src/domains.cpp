#include "cfa/domains.hpp"

#include <algorithm>
#include <sstream>

namespace cfa {

const AbsAddr* AbsEnv::lookup(const Var& x) const {
  auto it = std::lower_bound(
      entries_.begin(), entries_.end(), x,
      [](const auto& entry, const Var& key) { return entry.first < key; });
  if (it == entries_.end() || it->first != x) return nullptr;
  return &it->second;
}

AbsEnv AbsEnv::bind(const Var& x, AbsAddr a) const {
  AbsEnv out = *this;
  auto it = std::lower_bound(
      out.entries_.begin(), out.entries_.end(), x,
      [](const auto& entry, const Var& key) { return entry.first < key; });
  if (it != out.entries_.end() && it->first == x)
    it->second = std::move(a);
  else
    out.entries_.insert(it, {x, std::move(a)});
  return out;
}

AbsEnv AbsEnv::restrict_to(const std::set<Var>& keep) const {
  AbsEnv out;
  out.entries_.reserve(std::min(entries_.size(), keep.size()));
  for (const auto& entry : entries_)
    if (keep.count(entry.first)) out.entries_.push_back(entry);
  return out;
}

AbsEnv trim_env(const AbsEnv& env, const std::set<Var>& keep) {
  return env.restrict_to(keep);
}

std::strong_ordering operator<=>(const AACAddr& a, const AACAddr& b) {
  if (auto c = a.target <=> b.target; c != 0) return c;
  if (auto c = a.target_env <=> b.target_env; c != 0) return c;
  if (auto c = a.src <=> b.src; c != 0) return c;
  if (auto c = a.src_env <=> b.src_env; c != 0) return c;
  if (a.src_store == b.src_store) return std::strong_ordering::equal;
  if (!a.src_store) return std::strong_ordering::less;
  if (!b.src_store) return std::strong_ordering::greater;
  return *a.src_store <=> *b.src_store;
}

Store store_join(const Store& a, const Store& b) {
  Store out = a;
  store_join_into(out, b);
  return out;
}

KStore kstore_join(const KStore& a, const KStore& b) {
  KStore out = a;
  kstore_join_into(out, b);
  return out;
}

bool store_join_into(Store& dst, const Store& delta,
                     std::vector<AbsAddr>* changed) {
  bool any = false;
  for (const auto& [addr, flows] : delta) {
    if (flows.empty()) continue;
    FlowSet& target = dst[addr];
    size_t before = target.size();
    target.insert(flows.begin(), flows.end());
    if (target.size() != before) {
      any = true;
      if (changed) changed->push_back(addr);
    }
  }
  return any;
}

bool kstore_join_into(KStore& dst, const KStore& delta,
                      std::vector<KontAddr>* changed) {
  bool any = false;
  for (const auto& [addr, konts] : delta) {
    if (konts.empty()) continue;
    KontSet& target = dst[addr];
    size_t before = target.size();
    target.insert(konts.begin(), konts.end());
    if (target.size() != before) {
      any = true;
      if (changed) changed->push_back(addr);
    }
  }
  return any;
}

bool store_leq(const Store& a, const Store& b) {
  for (const auto& [addr, flows] : a) {
    auto it = b.find(addr);
    if (it == b.end()) {
      if (!flows.empty()) return false;
      continue;
    }
    if (!std::includes(it->second.begin(), it->second.end(), flows.begin(),
                       flows.end()))
      return false;
  }
  return true;
}

bool kstore_leq(const KStore& a, const KStore& b) {
  for (const auto& [addr, konts] : a) {
    auto it = b.find(addr);
    if (it == b.end()) {
      if (!konts.empty()) return false;
      continue;
    }
    if (!std::includes(it->second.begin(), it->second.end(), konts.begin(),
                       konts.end()))
      return false;
  }
  return true;
}

FlowSet abs_atomic_eval(const AtomicExp& ae, const AbsEnv& env,
                        const Store& store, const Program* program,
                        std::set<AbsAddr>* reads) {
  if (const auto* v = std::get_if<VarRef>(&ae)) {
    const AbsAddr* addr = env.lookup(v->name);
    if (!addr) return {};  // dead lookup
    if (reads) reads->insert(*addr);
    auto it = store.find(*addr);
    return it == store.end() ? FlowSet{} : it->second;
  }
  if (const auto* lam = std::get_if<const Lam*>(&ae)) {
    const std::set<Var>& fv =
        program ? program->lam_free_vars(*lam) : free_vars(AtomicExp{*lam});
    return {AbsValue{AbsClo{*lam, env.restrict_to(fv)}}};
  }
  if (const auto* b = std::get_if<BoolLit>(&ae))
    return {AbsValue{AbsBool{b->value}}};
  if (std::holds_alternative<NumLit>(ae)) return {AbsValue{AbsNum{}}};
  return {AbsValue{AbsPrim{std::get<PrimRef>(ae).op}}};
}

std::string to_string(const AbsAddr& a) {
  if (const auto* m = std::get_if<MonoVar>(&a)) return m->name;
  const auto& c = std::get<CallVar>(a);
  return c.name + "@e" + std::to_string(c.site.id);
}

std::string to_string(const AbsValue& v) {
  if (const auto* clo = std::get_if<AbsClo>(&v))
    return "clo@" + std::to_string(clo->lam->id);
  if (const auto* b = std::get_if<AbsBool>(&v)) return b->value ? "#t" : "#f";
  if (std::holds_alternative<AbsNum>(v)) return "num";
  if (const auto* p = std::get_if<AbsPrim>(&v))
    return "prim:" + std::string(prim_name(p->op));
  return "partial:" + std::string(prim_name(std::get<AbsPrimPartial>(v).op));
}

std::string to_string(const FlowSet& d) {
  std::ostringstream out;
  out << "{";
  bool first = true;
  for (const AbsValue& v : d) {
    if (!first) out << ",";
    first = false;
    out << to_string(v);
  }
  out << "}";
  return out.str();
}

std::string to_string(const AbsEnv& env) {
  std::ostringstream out;
  out << "[";
  bool first = true;
  for (const auto& [x, a] : env) {
    if (!first) out << ",";
    first = false;
    out << x << ":" << to_string(a);
  }
  out << "]";
  return out.str();
}

std::string to_string(const KontAddr& ka) {
  if (std::holds_alternative<HaltAddr>(ka)) return "halt";
  if (const auto* t = std::get_if<TargetExpAddr>(&ka))
    return "e" + std::to_string(t->target.id);
  if (const auto* tc = std::get_if<TargetExpCallAddr>(&ka))
    return "(e" + std::to_string(tc->target.id) + ",e" +
           std::to_string(tc->from.id) + ")";
  if (const auto* p = std::get_if<P4FAddr>(&ka))
    return "(e" + std::to_string(p->target.id) + "," + to_string(p->env) + ")";
  const auto& a = std::get<AACAddr>(ka);
  return "(e" + std::to_string(a.target.id) + "," + to_string(a.target_env) +
         ",e" + std::to_string(a.src.id) + "," + to_string(a.src_env) + ",s" +
         (a.src_store ? std::to_string(a.src_store->size()) : "0") + ")";
}

std::string to_string(const AbsFrame& f) {
  return "(" + f.bind + ",e" + std::to_string(f.ret->label.id) + "," +
         to_string(f.env) + ")";
}

std::string to_string(const Configuration& c) {
  return "(e" + std::to_string(c.exp->label.id) + "," + to_string(c.env) +
         "," + to_string(c.ka) + ")";
}

}  // namespace cfa
