#include "klsm/bench/sssp.hpp"

#include <atomic>
#include <memory>
#include <queue>
#include <thread>
#include <utility>

#include "klsm/queue.hpp"

namespace klsm::bench {

SsspResult dijkstra_ref(const Graph& g, std::uint32_t source) {
  SsspResult r;
  r.dist.assign(g.nodes, kUnreachable);
  if (source >= g.nodes) return r;
  r.dist[source] = 0;

  using Pq = std::pair<std::uint64_t, std::uint32_t>;
  std::priority_queue<Pq, std::vector<Pq>, std::greater<>> pq;
  pq.push({0, source});
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (d > r.dist[u]) continue;  // lazily deleted entry
    ++r.processed;
    for (const Edge& e : g.adj[u]) {
      std::uint64_t nd = d + e.weight;
      if (nd < r.dist[e.to]) {
        r.dist[e.to] = nd;
        pq.push({nd, e.to});
      }
    }
  }
  return r;
}

namespace {

// Atomic compare-and-swap minimum; true iff this call lowered the value.
bool fetch_min(std::atomic<std::uint64_t>& slot, std::uint64_t value) {
  std::uint64_t cur = slot.load(std::memory_order_relaxed);
  while (value < cur) {
    if (slot.compare_exchange_weak(cur, value, std::memory_order_relaxed))
      return true;
  }
  return false;
}

}  // namespace

SsspResult sssp_run(const Graph& g, std::uint32_t source, unsigned threads,
                    std::uint64_t k, std::uint64_t seed) {
  SsspResult r;
  r.dist.assign(g.nodes, kUnreachable);
  if (source >= g.nodes || threads == 0) return r;

  auto dist = std::make_unique<std::atomic<std::uint64_t>[]>(g.nodes);
  for (std::uint32_t i = 0; i < g.nodes; ++i)
    dist[i].store(kUnreachable, std::memory_order_relaxed);
  dist[source].store(0, std::memory_order_relaxed);

  // Queue entries plus entries being relaxed right now. It cannot rise from
  // zero (inserts only happen while their source entry is still counted), so
  // zero is a stable exact exit. Entries purged by the deletion hook are
  // never popped and strand the counter above zero; the idle sweep below
  // covers that case.
  std::atomic<std::uint64_t> pending{1};
  std::atomic<unsigned> idle{0};
  std::atomic<std::uint64_t> epoch{0};
  std::atomic<bool> done{false};

  Queue::Options qo;
  qo.relaxation = k;
  qo.max_handles = threads;
  qo.seed = seed;
  Queue q(qo);
  q.set_needs_deletion_hook([&dist](Key key, Payload node) {
    return key > dist[node].load(std::memory_order_relaxed);
  });

  std::vector<Handle*> handles;
  handles.reserve(threads);
  for (unsigned t = 0; t < threads; ++t)
    handles.push_back(&q.register_handle());
  q.insert(*handles[0], 0, source);

  std::vector<std::uint64_t> processed(threads, 0);
  auto worker = [&](unsigned t) {
    Handle& h = *handles[t];
    Entry e;
    for (;;) {
      if (q.try_delete_min(h, e)) {
        if (e.key > dist[e.payload].load(std::memory_order_relaxed)) {
          pending.fetch_sub(1, std::memory_order_acq_rel);  // stale entry
          continue;
        }
        ++processed[t];
        std::uint32_t u = static_cast<std::uint32_t>(e.payload);
        for (const Edge& ed : g.adj[u]) {
          std::uint64_t nd = e.key + ed.weight;
          if (fetch_min(dist[ed.to], nd)) {
            pending.fetch_add(1, std::memory_order_acq_rel);
            q.insert(h, nd, ed.to);
          }
        }
        // Released only after the follow-up inserts are counted, so pending
        // never dips to zero while reachable work is still unpublished.
        pending.fetch_sub(1, std::memory_order_acq_rel);
        continue;
      }

      if (pending.load(std::memory_order_acquire) == 0) return;

      // Possibly-empty verdict from the relaxed queue with a stranded
      // counter: park in the idle set. The last parker owns a quiescent
      // window (everyone else only spins on atomics) and sweeps the queue
      // for live items; a node's final-distance entry is never purged, so
      // an empty sweep proves every relaxation ran.
      std::uint64_t my_epoch = epoch.load(std::memory_order_acquire);
      if (idle.fetch_add(1, std::memory_order_acq_rel) + 1 == threads) {
        if (q.debug_total_live() == 0) {
          done.store(true, std::memory_order_release);
          return;
        }
        idle.store(0, std::memory_order_release);
        epoch.fetch_add(1, std::memory_order_release);
        continue;
      }
      while (epoch.load(std::memory_order_acquire) == my_epoch &&
             !done.load(std::memory_order_acquire) &&
             pending.load(std::memory_order_acquire) != 0)
        std::this_thread::yield();
      if (done.load(std::memory_order_acquire)) return;
    }
  };

  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker, t);
    for (auto& th : pool) th.join();
  }

  for (std::uint32_t i = 0; i < g.nodes; ++i)
    r.dist[i] = dist[i].load(std::memory_order_relaxed);
  for (std::uint64_t p : processed) r.processed += p;
  return r;
}

}  // namespace klsm::bench
