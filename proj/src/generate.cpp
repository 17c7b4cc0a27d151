#include "cfa/generate.hpp"

#include <cstdlib>

#include "cfa/concrete.hpp"
#include "cfa/syntax.hpp"

namespace cfa {

namespace {

class Gen {
 public:
  Gen(std::mt19937_64& rng, const GenConfig& cfg) : rng_(rng), cfg_(cfg) {}

  // Every program is a let* chain seeded with lambdas so closures actually
  // flow through calls; bare atoms never escape to the top level.
  std::string program() { return let_chain(cfg_.max_depth, {}, true); }

 private:
  std::mt19937_64& rng_;
  const GenConfig& cfg_;
  int next_var_ = 0;

  int roll(int n) { return static_cast<int>(rng_() % static_cast<uint64_t>(n)); }

  std::string fresh() { return "v" + std::to_string(next_var_++); }

  std::string pick(const std::vector<std::string>& scope) {
    return scope[static_cast<size_t>(roll(static_cast<int>(scope.size())))];
  }

  std::string atom(int depth, const std::vector<std::string>& scope) {
    int choice = roll(scope.empty() ? 4 : 8);
    switch (choice) {
      case 0: return "#t";
      case 1: return "#f";
      case 2: return std::to_string(roll(5));
      case 3: return depth > 0 ? lambda(depth - 1, scope) : "#t";
      default: return pick(scope);
    }
  }

  // Function positions are biased toward things that can actually be applied.
  std::string fn_atom(int depth, const std::vector<std::string>& scope) {
    int choice = roll(scope.empty() ? 3 : 6);
    switch (choice) {
      case 0:
      case 1: return lambda(depth > 0 ? depth - 1 : 0, scope);
      case 2: return roll(2) ? "not" : "add1";
      default: return pick(scope);
    }
  }

  std::string lambda(int depth, std::vector<std::string> scope) {
    std::string param = fresh();
    scope.push_back(param);
    return "(lambda (" + param + ") " + exp(depth, scope) + ")";
  }

  std::string call(int depth, const std::vector<std::string>& scope) {
    return "(" + fn_atom(depth, scope) + " " + atom(depth, scope) + ")";
  }

  std::string let_chain(int depth, std::vector<std::string> scope, bool top) {
    int n = (top ? 2 : 1) + roll(cfg_.max_let_chain);
    std::string out = "(let* (";
    for (int i = 0; i < n; ++i) {
      std::string x = fresh();
      // Seed the chain with a lambda binding so later calls have closures
      // in scope, then keep binding call results.
      if (i == 0 && top)
        out += "[" + x + " " + lambda(depth - 1, scope) + "]";
      else
        out += "[" + x + " " + call(depth - 1, scope) + "]";
      scope.push_back(x);
      out += " ";
    }
    out += ") " + exp(depth - 1, scope) + ")";
    return out;
  }

  std::string exp(int depth, std::vector<std::string> scope) {
    if (depth <= 0) return atom(0, scope);
    switch (roll(6)) {
      case 0:
        return atom(depth, scope);
      case 1:
      case 2:
        return let_chain(depth, scope, false);
      case 3: {  // conditional on a freshly bound boolean
        std::string c = fresh();
        std::string out = "(let* ([" + c + " (not " +
                          (roll(2) ? "#t" : "#f") + ")]) (if " + c + " " +
                          exp(depth - 1, scope) + " " + exp(depth - 1, scope) +
                          "))";
        return out;
      }
      default:
        return call(depth - 1, scope);
    }
  }
};

}  // namespace

std::string generate_random_source(std::mt19937_64& rng, const GenConfig& cfg) {
  return Gen(rng, cfg).program();
}

namespace {

// Trace-free termination probe; divergent candidates are common and a full
// trace of a long run copies the store per step.
bool halts_within(const Program& p, uint64_t step_limit) {
  CState state = inject_concrete(p);
  for (uint64_t i = 0; i < step_limit; ++i) {
    StepResult r = concrete_step(state);
    if (std::holds_alternative<Halted>(r)) return true;
    if (std::holds_alternative<Stuck>(r)) return false;
    state = std::move(std::get<Next>(r).state);
  }
  return false;
}

}  // namespace

std::vector<std::string> generate_terminating_sources(uint64_t seed,
                                                      size_t count,
                                                      uint64_t step_limit) {
  std::mt19937_64 rng(seed);
  std::vector<std::string> out;
  GenConfig cfg;
  while (out.size() < count) {
    std::string source = generate_random_source(rng, cfg);
    try {
      Program p = parse_program(source);
      if (!validate_anf(p).ok()) continue;
      if (halts_within(p, step_limit)) out.push_back(std::move(source));
    } catch (const std::exception&) {
      continue;  // malformed or scope-broken sample; draw again
    }
  }
  return out;
}

uint64_t seed_from_env(uint64_t fallback) {
  const char* env = std::getenv("P4F_SEED");
  if (!env || !*env) return fallback;
  return std::strtoull(env, nullptr, 10);
}

}  // namespace cfa
