#include "klsm/bench/throughput.hpp"

#include <chrono>
#include <stdexcept>
#include <thread>
#include <vector>

#include "klsm/queue.hpp"
#include "klsm/rng.hpp"

namespace klsm::bench {

namespace {

using Clock = std::chrono::steady_clock;

struct WorkerTally {
  std::uint64_t ops = 0;
  std::uint64_t inserts = 0;
  std::uint64_t deletes = 0;
  std::uint64_t empty = 0;
};

}  // namespace

ThroughputStats throughput_run(const ThroughputConfig& cfg) {
  if (cfg.threads == 0) throw std::invalid_argument("threads");
  if (cfg.duration_s <= 0) throw std::invalid_argument("duration");
  if (cfg.insert_ratio < 0 || cfg.insert_ratio > 1)
    throw std::invalid_argument("ratio");
  if (cfg.key_range == 0) throw std::invalid_argument("key range");

  Queue::Options qo;
  qo.relaxation = cfg.k;
  qo.max_handles = cfg.threads;
  qo.seed = cfg.seed;
  Queue q(qo);

  std::vector<Handle*> handles;
  handles.reserve(cfg.threads);
  for (unsigned t = 0; t < cfg.threads; ++t)
    handles.push_back(&q.register_handle());

  Rng prefill_rng(cfg.seed ^ 0x9E3779B97F4A7C15ull);
  for (std::uint64_t i = 0; i < cfg.prefill; ++i)
    q.insert(*handles[0], prefill_rng.below(cfg.key_range), i);

  // Insert iff the top 53 bits, as a unit fraction, fall under the ratio.
  const std::uint64_t insert_cut =
      static_cast<std::uint64_t>(cfg.insert_ratio * 0x1.0p53);

  std::vector<WorkerTally> tally(cfg.threads);
  std::atomic<bool> go{false};
  auto worker = [&](unsigned t) {
    Handle& h = *handles[t];
    Rng rng(cfg.seed * 0x6C8E9CF570932BD5ull + t + 1);
    WorkerTally& w = tally[t];
    while (!go.load(std::memory_order_acquire)) std::this_thread::yield();
    auto deadline =
        Clock::now() + std::chrono::duration<double>(cfg.duration_s);
    Entry e;
    for (;;) {
      for (int burst = 0; burst < 128; ++burst) {
        if ((rng.next() >> 11) < insert_cut) {
          q.insert(h, rng.below(cfg.key_range), w.ops);
          ++w.inserts;
        } else if (q.try_delete_min(h, e)) {
          ++w.deletes;
        } else {
          ++w.empty;
        }
        ++w.ops;
      }
      if (Clock::now() >= deadline) return;
    }
  };

  auto started = Clock::now();
  ThroughputStats s;
  if (cfg.threads == 1) {
    go.store(true, std::memory_order_release);
    worker(0);
    s.elapsed_s = std::chrono::duration<double>(Clock::now() - started).count();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(cfg.threads);
    for (unsigned t = 0; t < cfg.threads; ++t) pool.emplace_back(worker, t);
    started = Clock::now();
    go.store(true, std::memory_order_release);
    for (auto& th : pool) th.join();
    s.elapsed_s = std::chrono::duration<double>(Clock::now() - started).count();
  }

  for (const WorkerTally& w : tally) {
    s.total_ops += w.ops;
    s.inserts += w.inserts;
    s.deletes += w.deletes;
    s.empty_deletes += w.empty;
  }
  s.ops_per_thread_per_s =
      s.elapsed_s > 0
          ? static_cast<double>(s.total_ops) / cfg.threads / s.elapsed_s
          : 0.0;

  // Drain sequentially over every handle until a full pass finds nothing;
  // any one handle can report empty while another still holds local items.
  bool progress = true;
  while (progress) {
    progress = false;
    for (Handle* h : handles) {
      Entry e;
      while (q.try_delete_min(*h, e)) {
        ++s.drained;
        progress = true;
      }
    }
  }
  s.conserved = cfg.prefill + s.inserts == s.deletes + s.drained;
  return s;
}

}  // namespace klsm::bench
