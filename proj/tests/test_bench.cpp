#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <tuple>
#include <vector>
#include "klsm/bench/graph.hpp"
#include "klsm/bench/sssp.hpp"
#include "klsm/bench/throughput.hpp"

using namespace klsm::bench;

namespace {

Graph hand_graph(std::uint32_t n,
                 std::vector<std::tuple<std::uint32_t, std::uint32_t,
                                        std::uint64_t>> edges) {
  Graph g;
  g.nodes = n;
  g.adj.resize(n);
  for (auto& [u, v, w] : edges) g.adj[u].push_back({v, w});
  return g;
}

// Independent oracle: Bellman-Ford relaxation to fixpoint.
std::vector<std::uint64_t> bellman_ford(const Graph& g, std::uint32_t src) {
  std::vector<std::uint64_t> d(g.nodes, kUnreachable);
  d[src] = 0;
  for (bool changed = true; changed;) {
    changed = false;
    for (std::uint32_t u = 0; u < g.nodes; ++u) {
      if (d[u] == kUnreachable) continue;
      for (const Edge& e : g.adj[u]) {
        if (d[u] + e.weight < d[e.to]) {
          d[e.to] = d[u] + e.weight;
          changed = true;
        }
      }
    }
  }
  return d;
}

}  // namespace

TEST_CASE("gnp generator is deterministic per seed") {
  Graph a = gen_gnp(300, 0.03, 42);
  Graph b = gen_gnp(300, 0.03, 42);
  REQUIRE(a.nodes == b.nodes);
  REQUIRE(a.edge_count() == b.edge_count());
  for (std::uint32_t u = 0; u < a.nodes; ++u) {
    REQUIRE(a.adj[u].size() == b.adj[u].size());
    for (std::size_t i = 0; i < a.adj[u].size(); ++i) {
      CHECK(a.adj[u][i].to == b.adj[u][i].to);
      CHECK(a.adj[u][i].weight == b.adj[u][i].weight);
    }
  }
  Graph c = gen_gnp(300, 0.03, 43);
  CHECK(a.edge_count() != c.edge_count());  // 1-in-hundreds fluke at worst
}

TEST_CASE("gnp generator shape: no self loops, weights in range") {
  Graph g = gen_gnp(200, 0.05, 7, 1000);
  REQUIRE(g.nodes == 200);
  REQUIRE(g.adj.size() == 200);
  for (std::uint32_t u = 0; u < g.nodes; ++u) {
    for (const Edge& e : g.adj[u]) {
      CHECK(e.to != u);
      CHECK(e.to < g.nodes);
      CHECK(e.weight >= 1);
      CHECK(e.weight <= 1000);
    }
  }
}

TEST_CASE("gnp generator edge count tracks n(n-1)p") {
  // n=1000, p=0.05: mean 49950, sigma ~218; allow 3 sigma per seed.
  for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
    Graph g = gen_gnp(1000, 0.05, seed);
    CHECK(g.edge_count() > 49950 - 3 * 218);
    CHECK(g.edge_count() < 49950 + 3 * 218);
  }
}

TEST_CASE("gnp generator degenerate densities") {
  Graph empty = gen_gnp(50, 0.0, 1);
  CHECK(empty.edge_count() == 0);

  Graph full = gen_gnp(3, 1.0, 1);
  CHECK(full.edge_count() == 6);  // every ordered pair, no self loops
  for (std::uint32_t u = 0; u < 3; ++u) {
    REQUIRE(full.adj[u].size() == 2);
    CHECK(full.adj[u][0].to != u);
    CHECK(full.adj[u][1].to != u);
    CHECK(full.adj[u][0].to != full.adj[u][1].to);
  }

  CHECK_THROWS_AS(gen_gnp(10, -0.1, 1), std::invalid_argument);
  CHECK_THROWS_AS(gen_gnp(10, 1.5, 1), std::invalid_argument);
}

TEST_CASE("sequential reference on hand-built graphs") {
  Graph g = hand_graph(3, {{0, 1, 2}, {1, 2, 3}, {0, 2, 10}});
  SsspResult r = dijkstra_ref(g, 0);
  REQUIRE(r.dist.size() == 3);
  CHECK(r.dist[0] == 0);
  CHECK(r.dist[1] == 2);
  CHECK(r.dist[2] == 5);  // through node 1, not the direct weight-10 edge
  CHECK(r.processed == 3);

  Graph lone = hand_graph(1, {});
  SsspResult rl = dijkstra_ref(lone, 0);
  CHECK(rl.dist == std::vector<std::uint64_t>{0});
  CHECK(rl.processed == 1);

  Graph split = hand_graph(3, {{0, 1, 4}});
  SsspResult rs = dijkstra_ref(split, 0);
  CHECK(rs.dist[0] == 0);
  CHECK(rs.dist[1] == 4);
  CHECK(rs.dist[2] == kUnreachable);
  CHECK(rs.processed == 2);  // unreachable nodes are never settled

  SsspResult rb = dijkstra_ref(g, 2);  // source with no outgoing edges
  CHECK(rb.dist[2] == 0);
  CHECK(rb.dist[0] == kUnreachable);
  CHECK(rb.processed == 1);
}

TEST_CASE("sequential reference agrees with relaxation fixpoint") {
  for (std::uint64_t seed : {11, 12, 13, 14}) {
    Graph g = gen_gnp(60, 0.1, seed, 100);
    SsspResult r = dijkstra_ref(g, 0);
    CHECK(r.dist == bellman_ford(g, 0));
    std::uint64_t reachable = 0;
    for (std::uint64_t d : r.dist) reachable += d != kUnreachable;
    CHECK(r.processed == reachable);
  }
}

TEST_CASE("concurrent run returns exact distances") {
  for (std::uint64_t seed : {21, 22, 23}) {
    Graph g = gen_gnp(120, 0.08, seed, 1000);
    SsspResult base = dijkstra_ref(g, 0);
    for (unsigned threads : {1u, 2u, 4u}) {
      for (std::uint64_t k : {0ull, 64ull}) {
        SsspResult r = sssp_run(g, 0, threads, k, seed);
        REQUIRE(r.dist.size() == base.dist.size());
        for (std::uint32_t u = 0; u < g.nodes; ++u)
          REQUIRE(r.dist[u] == base.dist[u]);
        CHECK(r.processed >= base.processed);
      }
    }
  }
}

TEST_CASE("serial exact run settles each node exactly once") {
  for (std::uint64_t seed : {31, 32, 33, 34, 35}) {
    Graph g = gen_gnp(150, 0.06, seed);
    SsspResult base = dijkstra_ref(g, 0);
    SsspResult r = sssp_run(g, 0, 1, 0, seed);
    CHECK(r.dist == base.dist);
    CHECK(r.processed == base.processed);  // exact order leaves no rework
  }
}

TEST_CASE("concurrent run terminates on sparse and empty frontiers") {
  Graph lone = hand_graph(1, {});
  for (unsigned threads : {1u, 2u, 4u}) {
    SsspResult r = sssp_run(lone, 0, threads, 256, 5);
    CHECK(r.dist == std::vector<std::uint64_t>{0});
    CHECK(r.processed == 1);
  }

  Graph isolated = gen_gnp(40, 0.0, 1);
  SsspResult r = sssp_run(isolated, 3, 4, 256, 9);
  for (std::uint32_t u = 0; u < 40; ++u)
    CHECK(r.dist[u] == (u == 3 ? 0 : kUnreachable));
  CHECK(r.processed == 1);
}

TEST_CASE("concurrent run honors a non-default source") {
  Graph g = hand_graph(4, {{2, 0, 1}, {0, 1, 1}, {1, 3, 1}, {2, 3, 9}});
  SsspResult r = sssp_run(g, 2, 2, 16, 3);
  CHECK(r.dist == std::vector<std::uint64_t>{1, 2, 0, 3});
}

TEST_CASE("throughput run conserves items and tallies ops") {
  ThroughputConfig cfg;
  cfg.threads = 2;
  cfg.k = 16;
  cfg.prefill = 500;
  cfg.duration_s = 0.05;
  cfg.seed = 9;
  ThroughputStats s = throughput_run(cfg);
  CHECK(s.conserved);
  CHECK(s.total_ops == s.inserts + s.deletes + s.empty_deletes);
  CHECK(s.total_ops > 0);
  CHECK(s.drained == cfg.prefill + s.inserts - s.deletes);
  CHECK(s.elapsed_s >= cfg.duration_s);
  CHECK(s.ops_per_thread_per_s > 0.0);
}

TEST_CASE("throughput run respects one-sided op ratios") {
  ThroughputConfig cfg;
  cfg.threads = 2;
  cfg.k = 8;
  cfg.prefill = 100;
  cfg.duration_s = 0.02;
  cfg.seed = 4;

  cfg.insert_ratio = 1.0;
  ThroughputStats ins = throughput_run(cfg);
  CHECK(ins.deletes == 0);
  CHECK(ins.empty_deletes == 0);
  CHECK(ins.inserts == ins.total_ops);
  CHECK(ins.conserved);

  cfg.insert_ratio = 0.0;
  ThroughputStats del = throughput_run(cfg);
  CHECK(del.inserts == 0);
  CHECK(del.deletes == cfg.prefill);  // drains, then only empty attempts
  CHECK(del.empty_deletes == del.total_ops - del.deletes);
  CHECK(del.conserved);
}

TEST_CASE("throughput run rejects malformed configs") {
  ThroughputConfig cfg;
  cfg.threads = 0;
  CHECK_THROWS_AS(throughput_run(cfg), std::invalid_argument);
  cfg.threads = 1;
  cfg.duration_s = -1.0;
  CHECK_THROWS_AS(throughput_run(cfg), std::invalid_argument);
  cfg.duration_s = 0.01;
  cfg.insert_ratio = 1.5;
  CHECK_THROWS_AS(throughput_run(cfg), std::invalid_argument);
  cfg.insert_ratio = 0.5;
  cfg.key_range = 0;
  CHECK_THROWS_AS(throughput_run(cfg), std::invalid_argument);
}
