#pragma once

#include <cstdint>
#include <vector>

#include "klsm/bench/graph.hpp"

namespace klsm::bench {

inline constexpr std::uint64_t kUnreachable = ~0ull;

struct SsspResult {
  std::vector<std::uint64_t> dist;
  // Pops that did useful work: the entry still carried the node's current
  // tentative distance. Stale pops and hook purges are not counted.
  std::uint64_t processed = 0;
};

// Textbook sequential Dijkstra over a binary heap with lazy deletion;
// `processed` counts settled nodes (one per reachable node).
SsspResult dijkstra_ref(const Graph& g, std::uint32_t source);

// Label-correcting run over the relaxed queue: entries are (distance, node);
// improvements re-insert instead of decrease-key, stale entries are dropped
// on pop, and the queue's deletion hook purges them during merges. Exact on
// termination for any thread count and relaxation.
SsspResult sssp_run(const Graph& g, std::uint32_t source, unsigned threads,
                    std::uint64_t k, std::uint64_t seed = 1);

}  // namespace klsm::bench
