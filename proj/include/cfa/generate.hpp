#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

// Seeded random ANF program generation for differential testing between the
// concrete interpreter and the abstract analyses.

namespace cfa {

struct GenConfig {
  int max_depth = 4;
  int max_let_chain = 3;
};

// One random closed program in concrete syntax. Not guaranteed to terminate
// or even to avoid sticking; callers filter.
std::string generate_random_source(std::mt19937_64& rng,
                                   const GenConfig& cfg = {});

// `count` seeded programs whose concrete run halts within step_limit steps.
// Deterministic for a fixed seed.
std::vector<std::string> generate_terminating_sources(uint64_t seed,
                                                      size_t count,
                                                      uint64_t step_limit = 2000);

// Reads a seed override from the P4F_SEED environment variable, falling back
// to the given default.
uint64_t seed_from_env(uint64_t fallback);

}  // namespace cfa
