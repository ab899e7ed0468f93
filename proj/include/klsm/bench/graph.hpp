#pragma once

#include <cstdint>
#include <vector>

namespace klsm::bench {

struct Edge {
  std::uint32_t to;
  std::uint64_t weight;
};

// Directed graph in adjacency-list form.
struct Graph {
  std::uint32_t nodes = 0;
  std::vector<std::vector<Edge>> adj;

  std::uint64_t edge_count() const {
    std::uint64_t n = 0;
    for (const auto& a : adj) n += a.size();
    return n;
  }
};

// Samples each of the n(n-1) directed non-loop edges independently with
// probability p (geometric skipping, so sparse graphs cost O(edges)).
// Weights are uniform in [1, wmax]. Deterministic for a fixed seed.
Graph gen_gnp(std::uint32_t n, double p, std::uint64_t seed,
              std::uint64_t wmax = 100000000ull);

}  // namespace klsm::bench
