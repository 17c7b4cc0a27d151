#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cfa/corpus.hpp"
#include "cfa/fixpoint.hpp"
#include "test_util.hpp"

using namespace cfa;

TEST_CASE("value allocation per policy") {
  Program p = parse_program(identity_pair_source());
  AbstractState s = abs_inject(p);
  s.exp = p.exp_at(Label{1});

  CHECK(value_alloc(ValuePolicy::Mono, "x", s) == AbsAddr{MonoVar{"x"}});
  CHECK(value_alloc(ValuePolicy::CallSensitive1, "x", s) ==
        AbsAddr{CallVar{"x", Label{1}}});
  // purity: identical inputs, identical address
  CHECK(value_alloc(ValuePolicy::CallSensitive1, "x", s) ==
        value_alloc(ValuePolicy::CallSensitive1, "x", s));
}

TEST_CASE("continuation allocation per policy") {
  Program p = parse_program(identity_pair_source());
  StoreInterner interner;
  const Exp* body = p.exp_at(Label{4});  // identity body

  AbsEnv src_env = AbsEnv{}.bind("id", CallVar{"id", Label{0}});
  AbsEnv rho1 = AbsEnv{}.bind("x", CallVar{"x", Label{1}});
  AbsEnv rho2 = AbsEnv{}.bind("x", CallVar{"x", Label{2}});
  Store store;

  SUBCASE("target-expression addresses collide across call sites") {
    KontAddr first = kont_alloc(KontPolicy::TargetExp, Label{1}, src_env, store,
                                body, rho1, store, interner);
    KontAddr second = kont_alloc(KontPolicy::TargetExp, Label{2}, src_env, store,
                                 body, rho2, store, interner);
    CHECK(first == KontAddr{TargetExpAddr{Label{4}}});
    CHECK(first == second);
  }
  SUBCASE("one-call-sensitive addresses separate the two calls") {
    KontAddr first = kont_alloc(KontPolicy::TargetExpCall1, Label{1}, src_env,
                                store, body, rho1, store, interner);
    KontAddr second = kont_alloc(KontPolicy::TargetExpCall1, Label{2}, src_env,
                                 store, body, rho2, store, interner);
    CHECK(first == KontAddr{TargetExpCallAddr{Label{4}, Label{1}}});
    CHECK(first != second);
  }
  SUBCASE("entry-point addresses are the target expression and environment") {
    KontAddr first = kont_alloc(KontPolicy::P4F, Label{1}, src_env, store, body,
                                rho1, store, interner);
    CHECK(first == KontAddr{P4FAddr{Label{4}, rho1}});
    // Under 1-call-sensitive values the two calls bind x at different
    // addresses, so the entry environments (and addresses) differ.
    KontAddr second = kont_alloc(KontPolicy::P4F, Label{2}, src_env, store, body,
                                 rho2, store, interner);
    CHECK(first != second);
  }
  SUBCASE("AAC addresses carry the source state and its store snapshot") {
    Store src1;
    src1[MonoVar{"a"}] = {AbsBool{true}};
    KontAddr first = kont_alloc(KontPolicy::AAC, Label{1}, src_env, src1, body,
                                rho1, src1, interner);
    const auto* aac = std::get_if<AACAddr>(&first);
    REQUIRE(aac != nullptr);
    CHECK(aac->target == Label{4});
    CHECK(aac->src == Label{1});
    CHECK(*aac->src_store == src1);
    // Same transition against a grown store gives a distinct address.
    Store src2 = src1;
    src2[MonoVar{"a"}].insert(AbsBool{false});
    KontAddr second = kont_alloc(KontPolicy::AAC, Label{1}, src_env, src2, body,
                                 rho1, src2, interner);
    CHECK(first != second);
  }
}

TEST_CASE("allocation consistency: stores do not leak into addresses") {
  Program p = parse_program(identity_pair_source());
  StoreInterner interner;
  std::mt19937_64 rng(11);
  const Exp* body = p.exp_at(Label{4});
  AbsEnv src_env = AbsEnv{}.bind("id", MonoVar{"id"});
  AbsEnv rho = AbsEnv{}.bind("x", MonoVar{"x"});

  for (int i = 0; i < 200; ++i) {
    Store a = testutil::random_store(rng, p);
    Store b = testutil::random_store(rng, p);
    for (ValuePolicy vp : {ValuePolicy::Mono, ValuePolicy::CallSensitive1})
      CHECK(value_alloc(vp, "x", Label{1}) == value_alloc(vp, "x", Label{1}));
    for (KontPolicy kp : {KontPolicy::TargetExp, KontPolicy::TargetExpCall1,
                          KontPolicy::P4F}) {
      CHECK(kont_alloc(kp, Label{1}, src_env, a, body, rho, a, interner) ==
            kont_alloc(kp, Label{1}, src_env, b, body, rho, b, interner));
    }
  }
}

TEST_CASE("no policy ever returns the halt address") {
  Program p = parse_program(identity_pair_source());
  StoreInterner interner;
  std::mt19937_64 rng(13);
  for (int i = 0; i < 200; ++i) {
    Label src{static_cast<uint32_t>(rng() % p.exp_count())};
    const Exp* target =
        p.exp_at(Label{static_cast<uint32_t>(rng() % p.exp_count())});
    Store store = testutil::random_store(rng, p);
    AbsEnv env;
    if (rng() % 2) env = env.bind("v", MonoVar{"v"});
    for (KontPolicy kp : {KontPolicy::TargetExp, KontPolicy::TargetExpCall1,
                          KontPolicy::AAC, KontPolicy::P4F})
      CHECK_FALSE(is_halt(kont_alloc(kp, src, env, store, target, env, store,
                                     interner)));
  }
}

TEST_CASE("interned snapshots compare structurally with pointer fast path") {
  StoreInterner interner;
  Store a;
  a[MonoVar{"x"}] = {AbsBool{true}};
  Store b = a;
  InternedStore ia = interner.intern(a);
  InternedStore ib = interner.intern(b);
  CHECK(ia.get() == ib.get());  // deduplicated
  StoreInterner other;
  InternedStore ic = other.intern(a);
  CHECK(ia.get() != ic.get());
  // structural equality across interners
  AACAddr addr1{Label{1}, AbsEnv{}, Label{0}, AbsEnv{}, ia};
  AACAddr addr2{Label{1}, AbsEnv{}, Label{0}, AbsEnv{}, ic};
  CHECK(addr1 == addr2);
}

TEST_CASE("P4F addresses determine their entry configuration") {
  Program p = parse_program(identity_pair_source());
  AnalysisResult xi =
      analyze(p, PolicyPair{ValuePolicy::CallSensitive1, KontPolicy::P4F});
  int p4f_addrs = 0;
  for (const auto& [ka, konts] : xi.kstore) {
    if (konts.empty()) continue;
    auto entry = entry_config(ka, p);
    REQUIRE(entry.has_value());
    CHECK(xi.reachable.count(*entry) == 1);
    if (std::holds_alternative<P4FAddr>(ka)) ++p4f_addrs;
  }
  CHECK(p4f_addrs >= 2);  // the two identity invocations stay apart

  CHECK(entry_config(KontAddr{HaltAddr{}}, p) ==
        Configuration{p.root(), AbsEnv{}, HaltAddr{}});
  CHECK_FALSE(entry_config(KontAddr{TargetExpAddr{Label{4}}}, p).has_value());
}

// Re-derives all four address families over the call transitions of a P4F
// fixpoint; coarser policies must produce no more distinct addresses than the
// finer ones they project from.
TEST_CASE("address discrimination ordering over corpus call transitions") {
  for (const CorpusEntry& entry : builtin_corpus()) {
    CAPTURE(entry.name);
    Program p = parse_program(entry.source);
    for (ValuePolicy vp : {ValuePolicy::Mono, ValuePolicy::CallSensitive1}) {
      PolicyPair policy{vp, KontPolicy::P4F};
      AnalysisResult xi = analyze(p, policy);
      StoreInterner interner;
      std::set<KontAddr> naive, naive1, p4f, aac;
      for (const Configuration& c : xi.reachable) {
        const LetCall* let = c.exp->as_let();
        if (!let) continue;
        FlowSet fns = abs_atomic_eval(let->fn, c.env, xi.store, &p);
        for (const AbsValue& fn : fns) {
          const auto* clo = std::get_if<AbsClo>(&fn);
          if (!clo) continue;
          AbsAddr param = value_alloc(vp, clo->lam->param, c.exp->label);
          AbsEnv rho = trim_env(clo->env.bind(clo->lam->param, param),
                                p.free_vars(clo->lam->body));
          auto alloc = [&](KontPolicy kp) {
            return kont_alloc(kp, c.exp->label, c.env, xi.store,
                              clo->lam->body, rho, xi.store, interner);
          };
          naive.insert(alloc(KontPolicy::TargetExp));
          naive1.insert(alloc(KontPolicy::TargetExpCall1));
          p4f.insert(alloc(KontPolicy::P4F));
          aac.insert(alloc(KontPolicy::AAC));
        }
      }
      CHECK(naive.size() <= naive1.size());
      CHECK(p4f.size() <= aac.size());
    }
  }
}

TEST_CASE("policy names round-trip") {
  for (const char* name : {"mono", "1cfa"})
    CHECK(to_string(*value_policy_from_name(name)) == name);
  for (const char* name : {"naive", "naive-1cfa", "aac", "p4f"})
    CHECK(to_string(*kont_policy_from_name(name)) == name);
  CHECK_FALSE(value_policy_from_name("2cfa").has_value());
  CHECK_FALSE(kont_policy_from_name("cfa2").has_value());
}
