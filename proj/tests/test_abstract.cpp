#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cfa/corpus.hpp"
#include "cfa/machine.hpp"
#include "test_util.hpp"

using namespace cfa;

namespace {

AbstractState step_once(const Program& p, const AbstractState& s,
                        const PolicyPair& policy, StoreInterner& interner) {
  auto succs = abs_step(p, s, policy, interner);
  REQUIRE(succs.size() == 1);
  return *succs.begin();
}

}  // namespace

TEST_CASE("abstract atomic evaluation") {
  Program p = parse_program("(let ([y ((lambda (x) x) #t)]) y)");
  const Lam* lam = std::get<const Lam*>(p.root()->as_let()->fn);

  SUBCASE("lambda yields a singleton closure trimmed to its free variables") {
    AbsEnv env = AbsEnv{}.bind("junk", MonoVar{"junk"});
    FlowSet d = abs_atomic_eval(AtomicExp{lam}, env, Store{}, &p);
    REQUIRE(d.size() == 1);
    const auto& clo = std::get<AbsClo>(*d.begin());
    CHECK(clo.lam == lam);
    CHECK(clo.env.empty());  // identity has no free variables
  }
  SUBCASE("variable lookup returns the whole flow set") {
    AbsEnv env = AbsEnv{}.bind("x", MonoVar{"x"});
    Store store;
    store[MonoVar{"x"}] = {AbsBool{true}, AbsBool{false}};
    FlowSet d = abs_atomic_eval(VarRef{"x"}, env, store);
    CHECK(d == FlowSet{AbsBool{true}, AbsBool{false}});
  }
  SUBCASE("dead lookups are bottom, not errors") {
    AbsEnv env = AbsEnv{}.bind("x", MonoVar{"x"});
    CHECK(abs_atomic_eval(VarRef{"x"}, env, Store{}).empty());
    CHECK(abs_atomic_eval(VarRef{"q"}, AbsEnv{}, Store{}).empty());
  }
  SUBCASE("literals are singletons") {
    CHECK(abs_atomic_eval(BoolLit{true}, AbsEnv{}, Store{}) ==
          FlowSet{AbsBool{true}});
    CHECK(abs_atomic_eval(NumLit{7}, AbsEnv{}, Store{}) == FlowSet{AbsNum{}});
    CHECK(abs_atomic_eval(PrimRef{Prim::Add}, AbsEnv{}, Store{}) ==
          FlowSet{AbsPrim{Prim::Add}});
  }
}

TEST_CASE("store join examples") {
  Program p = parse_program("((lambda (x) x) #t)");
  std::mt19937_64 rng(1);
  Store sigma = testutil::random_store(rng, p);

  CHECK(store_join(sigma, Store{}) == sigma);  // bottom is the identity

  Store a, b;
  a[MonoVar{"a"}] = {AbsBool{true}};
  b[MonoVar{"a"}] = {AbsBool{false}};
  Store joined = store_join(a, b);
  CHECK(joined.at(MonoVar{"a"}) == FlowSet{AbsBool{true}, AbsBool{false}});

  CHECK(store_join(a, b) == store_join(b, a));
}

TEST_CASE("join laws on random stores") {
  Program p = parse_program("((lambda (x) x) (lambda (y) y))");
  std::mt19937_64 rng(42);
  for (int i = 0; i < 1000; ++i) {
    Store a = testutil::random_store(rng, p);
    Store b = testutil::random_store(rng, p);
    Store c = testutil::random_store(rng, p);
    CHECK(store_join(a, store_join(b, c)) == store_join(store_join(a, b), c));
    CHECK(store_join(a, b) == store_join(b, a));
    CHECK(store_join(a, a) == a);
    CHECK(store_join(a, Store{}) == a);
  }
}

TEST_CASE("injection starts from empty env, bottom stores and the halt address") {
  Program p = parse_program(identity_pair_source());
  AbstractState s = abs_inject(p);
  CHECK(s.exp == p.root());
  CHECK(s.env.empty());
  CHECK(s.store.empty());
  CHECK(s.kstore.empty());
  CHECK(is_halt(s.ka));

  AbstractState again = abs_inject(p);
  CHECK(s == again);
}

TEST_CASE("return at the root produces no successors") {
  Program p = parse_program("#t");
  StoreInterner interner;
  PolicyPair policy{ValuePolicy::Mono, KontPolicy::TargetExp};
  CHECK(abs_step(p, abs_inject(p), policy, interner).empty());
}

// The worked example: two calls of one identity function, 1-call-sensitive
// value addresses, target-expression continuation addresses. Expression
// labels after parsing: 1 = let binding y, 2 = let binding z, 3 = final
// return, 4 = identity body.
TEST_CASE("worked example: first call binds (x,e1) and extends kstore at e0") {
  Program p = parse_program(identity_pair_source());
  PolicyPair policy{ValuePolicy::CallSensitive1, KontPolicy::TargetExp};
  StoreInterner interner;

  AbstractState s1 = step_once(p, abs_inject(p), policy, interner);
  CHECK(s1.exp == p.exp_at(Label{1}));
  REQUIRE(s1.env.lookup("id") != nullptr);
  CHECK(*s1.env.lookup("id") == AbsAddr{CallVar{"id", Label{0}}});

  AbstractState s2 = step_once(p, s1, policy, interner);
  CHECK(s2.exp == p.exp_at(Label{4}));
  CHECK(s2.ka == KontAddr{TargetExpAddr{Label{4}}});
  CHECK(s2.store.at(CallVar{"x", Label{1}}) == FlowSet{AbsBool{true}});

  const KontSet& konts = s2.kstore.at(TargetExpAddr{Label{4}});
  REQUIRE(konts.size() == 1);
  const AbsKont& kont = *konts.begin();
  CHECK(kont.frame.bind == "y");
  CHECK(kont.frame.ret == p.exp_at(Label{2}));
  CHECK(*kont.frame.env.lookup("id") == AbsAddr{CallVar{"id", Label{0}}});
  CHECK(is_halt(kont.tail));
}

TEST_CASE("return with two stored continuations yields exactly two successors") {
  Program p = parse_program(identity_pair_source());
  PolicyPair policy{ValuePolicy::CallSensitive1, KontPolicy::TargetExp};
  StoreInterner interner;

  // Return state built by hand: identity body with both frames stored.
  KontAddr e0 = TargetExpAddr{Label{4}};
  AbstractState s;
  s.exp = p.exp_at(Label{4});
  s.env = AbsEnv{}.bind("x", CallVar{"x", Label{1}});
  s.store[CallVar{"x", Label{1}}] = {AbsBool{true}};
  AbsEnv frame1_env = AbsEnv{}.bind("id", CallVar{"id", Label{0}});
  s.kstore[e0] = {AbsKont{{"y", p.exp_at(Label{2}), frame1_env}, HaltAddr{}},
                  AbsKont{{"z", p.exp_at(Label{3}), AbsEnv{}}, HaltAddr{}}};
  s.ka = e0;

  auto succs = abs_step(p, s, policy, interner);
  CHECK(succs.size() == 2);
  // One branch binds (y,e4) genuinely; the other spuriously binds (z,e4).
  bool bound_y = false, bound_z = false;
  for (const AbstractState& succ : succs) {
    if (succ.exp == p.exp_at(Label{2}))
      bound_y = succ.store.at(CallVar{"y", Label{4}}) == FlowSet{AbsBool{true}};
    if (succ.exp == p.exp_at(Label{3}))
      bound_z = succ.store.at(CallVar{"z", Label{4}}) == FlowSet{AbsBool{true}};
  }
  CHECK(bound_y);
  CHECK(bound_z);
}

TEST_CASE("halt hygiene: no step extends the continuation store at halt") {
  for (const CorpusEntry& entry : builtin_corpus()) {
    Program p = parse_program(entry.source);
    StoreInterner interner;
    PolicyPair policy{ValuePolicy::Mono, KontPolicy::P4F};
    std::set<AbstractState> frontier = {abs_inject(p)};
    for (int depth = 0; depth < 4 && !frontier.empty(); ++depth) {
      std::set<AbstractState> next;
      for (const AbstractState& s : frontier)
        for (const AbstractState& succ : abs_step(p, s, policy, interner)) {
          auto it = succ.kstore.find(KontAddr{HaltAddr{}});
          CHECK((it == succ.kstore.end() || it->second.empty()));
          next.insert(succ);
        }
      frontier = std::move(next);
    }
  }
}

TEST_CASE("conditionals fork on flow sets") {
  Program p = parse_program("(let ([c (zero? 0)]) (if c #t #f))");
  PolicyPair policy{ValuePolicy::Mono, KontPolicy::TargetExp};
  StoreInterner interner;
  AbstractState s1 = step_once(p, abs_inject(p), policy, interner);
  REQUIRE(s1.exp->as_if() != nullptr);
  // zero? of the abstract number is both truths, so both branches step.
  auto branches = abs_step(p, s1, policy, interner);
  CHECK(branches.size() == 2);
}

TEST_CASE("conditional with a definite condition explores one branch") {
  Program p = parse_program("(let ([c (not #f)]) (if c #t #f))");
  PolicyPair policy{ValuePolicy::Mono, KontPolicy::TargetExp};
  StoreInterner interner;
  AbstractState s1 = step_once(p, abs_inject(p), policy, interner);
  auto branches = abs_step(p, s1, policy, interner);
  REQUIRE(branches.size() == 1);
  CHECK(branches.begin()->exp->as_return() != nullptr);
}

TEST_CASE("non-callable values in fn position contribute no successors") {
  Program p = parse_program("(let ([y (#t #f)]) y)");
  StoreInterner interner;
  PolicyPair policy{ValuePolicy::Mono, KontPolicy::TargetExp};
  StepOutput out = step_config(p, abs_inject(p).config(), Store{}, KStore{},
                               policy, interner);
  CHECK(out.successors.empty());
  CHECK(out.dropped_non_callable == 1);
}

TEST_CASE("abstract primitives") {
  FlowSet bools = {AbsBool{true}, AbsBool{false}};
  FlowSet nums = {AbsNum{}};
  CHECK(abs_apply_prim(Prim::Not, bools) == bools);
  CHECK(abs_apply_prim(Prim::Not, nums).empty());
  CHECK(abs_apply_prim(Prim::Add1, nums) == nums);
  CHECK(abs_apply_prim(Prim::IsZero, nums) == bools);
  CHECK(abs_apply_prim(Prim::Add, nums) == FlowSet{AbsPrimPartial{Prim::Add}});
  CHECK(abs_apply_prim_partial(Prim::Add, nums) == nums);
  CHECK(abs_apply_prim_partial(Prim::Add, bools).empty());
}

TEST_CASE("step monotonicity in the stores") {
  Program p = parse_program(identity_pair_source());
  PolicyPair policies[] = {{ValuePolicy::Mono, KontPolicy::TargetExp},
                           {ValuePolicy::CallSensitive1, KontPolicy::P4F}};
  std::mt19937_64 rng(7);
  StoreInterner interner;

  for (const PolicyPair& policy : policies) {
    AbstractState s;
    s.exp = p.exp_at(Label{1});
    s.env = AbsEnv{}.bind("id", MonoVar{"id"});
    s.ka = HaltAddr{};
    for (int i = 0; i < 200; ++i) {
      AbstractState lo_state = s;
      lo_state.store = testutil::random_store(rng, p);
      lo_state.store[MonoVar{"id"}].insert(AbsClo{p.lam_at(0), AbsEnv{}});
      AbstractState hi_state = lo_state;
      hi_state.store = store_join(lo_state.store, testutil::random_store(rng, p));
      auto lo = abs_step(p, lo_state, policy, interner);
      auto hi = abs_step(p, hi_state, policy, interner);
      for (const AbstractState& succ : lo) {
        bool covered = false;
        for (const AbstractState& other : hi) {
          if (other.exp != succ.exp || !(other.env == succ.env) ||
              !(other.ka == succ.ka))
            continue;
          if (store_leq(succ.store, other.store) &&
              kstore_leq(succ.kstore, other.kstore)) {
            covered = true;
            break;
          }
        }
        CHECK(covered);
      }
    }
  }
}
