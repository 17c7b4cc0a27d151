#pragma once

#include <random>
#include <vector>

#include "cfa/domains.hpp"
#include "cfa/syntax.hpp"

// Shared helpers for randomized lattice tests.

namespace cfa::testutil {

inline AbsValue random_value(std::mt19937_64& rng, const Program& p) {
  switch (rng() % 5) {
    case 0: return AbsBool{true};
    case 1: return AbsBool{false};
    case 2: return AbsNum{};
    case 3: return AbsPrim{Prim::Not};
    default: {
      const Lam* lam = p.lam_at(static_cast<uint32_t>(rng() % p.lam_count()));
      AbsEnv env;
      if (rng() % 2) env = env.bind("w", MonoVar{"w"});
      return AbsClo{lam, env};
    }
  }
}

inline FlowSet random_flow_set(std::mt19937_64& rng, const Program& p) {
  FlowSet out;
  size_t n = rng() % 3 + 1;
  for (size_t i = 0; i < n; ++i) out.insert(random_value(rng, p));
  return out;
}

inline Store random_store(std::mt19937_64& rng, const Program& p) {
  static const std::vector<Var> vars = {"a", "b", "c", "d", "e"};
  Store out;
  size_t n = rng() % 4;
  for (size_t i = 0; i < n; ++i) {
    AbsAddr addr = rng() % 2
                       ? AbsAddr{MonoVar{vars[rng() % vars.size()]}}
                       : AbsAddr{CallVar{vars[rng() % vars.size()],
                                         Label{static_cast<uint32_t>(rng() % 3)}}};
    out[addr] = random_flow_set(rng, p);
  }
  return out;
}

}  // namespace cfa::testutil
