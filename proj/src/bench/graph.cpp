#include "klsm/bench/graph.hpp"

#include <cmath>
#include <stdexcept>

#include "klsm/rng.hpp"

namespace klsm::bench {

namespace {

double unit_double(Rng& rng) {
  return static_cast<double>(rng.next() >> 11) * 0x1.0p-53;
}

}  // namespace

Graph gen_gnp(std::uint32_t n, double p, std::uint64_t seed,
              std::uint64_t wmax) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("edge probability");
  if (wmax == 0) throw std::invalid_argument("weight range");
  Graph g;
  g.nodes = n;
  g.adj.resize(n);
  if (n < 2 || p == 0.0) return g;

  Rng rng(seed);
  const std::uint64_t total = static_cast<std::uint64_t>(n) * (n - 1);
  auto place = [&](std::uint64_t e) {
    std::uint32_t u = static_cast<std::uint32_t>(e / (n - 1));
    std::uint32_t r = static_cast<std::uint32_t>(e % (n - 1));
    std::uint32_t v = r >= u ? r + 1 : r;  // skip the self-loop slot
    g.adj[u].push_back({v, 1 + rng.below(wmax)});
  };

  if (p == 1.0) {
    for (std::uint64_t e = 0; e < total; ++e) place(e);
    return g;
  }

  // Skip-length sampling: gaps between present edges are geometric(p).
  const double denom = std::log1p(-p);
  std::uint64_t e = 0;
  for (;;) {
    double u = unit_double(rng);
    if (u <= 0.0) u = 0x1.0p-53;
    e += static_cast<std::uint64_t>(std::log(u) / denom);
    if (e >= total) break;
    place(e);
    ++e;
  }
  return g;
}

}  // namespace klsm::bench
