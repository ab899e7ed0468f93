#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <set>
#include <thread>
#include <vector>

#include "doctest.h"
#include "klsm/queue.hpp"
#include "klsm/rng.hpp"
#include "test_util.hpp"

using namespace klsm;
using testutil::drain;

namespace {

Queue::Options opts(std::uint64_t k, unsigned handles = 1,
                    std::uint64_t seed = 42) {
  Queue::Options o;
  o.relaxation = k;
  o.max_handles = handles;
  o.seed = seed;
  return o;
}

}  // namespace

TEST_CASE("single items round-trip with their payloads") {
  Queue q(opts(16));
  Handle& h = q.register_handle();
  q.insert(h, 7, 70);
  q.insert(h, 3, 30);
  q.insert(h, 5, 50);
  Entry e;
  REQUIRE(q.try_delete_min(h, e));
  CHECK(e.key == 3);
  CHECK(e.payload == 30);
  REQUIRE(q.try_delete_min(h, e));
  CHECK(e.key == 5);
  CHECK(e.payload == 50);
  REQUIRE(q.try_delete_min(h, e));
  CHECK(e.key == 7);
  CHECK(e.payload == 70);
  CHECK_FALSE(q.try_delete_min(h, e));
}

TEST_CASE("duplicate keys are returned once per insertion") {
  Queue q(opts(8));
  Handle& h = q.register_handle();
  for (int i = 0; i < 5; ++i) q.insert(h, 4, 100 + i);
  std::vector<Key> got = drain(q, h);
  CHECK(got == std::vector<Key>(5, 4));
}

TEST_CASE("with k=0 the queue matches an exact heap") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    Queue q(opts(0, 1, seed));
    Handle& h = q.register_handle();
    std::multiset<Key> oracle;
    Rng rng(seed * 977 + 5);
    for (int op = 0; op < 2000; ++op) {
      if (rng.below(10) < 6) {
        Key k = rng.below(1000);
        q.insert(h, k, k);
        oracle.insert(k);
      } else {
        Entry e;
        bool ok = q.try_delete_min(h, e);
        REQUIRE(ok == !oracle.empty());
        if (ok) {
          REQUIRE(e.key == *oracle.begin());
          oracle.erase(oracle.begin());
        }
      }
    }
    std::vector<Key> rest = drain(q, h);
    std::vector<Key> expect(oracle.begin(), oracle.end());
    CHECK(rest == expect);
    CHECK(q.approx_size() == 0);
  }
}

TEST_CASE("single-handle deletions stay within rank k+1") {
  const std::uint64_t k = 16;
  Queue q(opts(k, 1, 9));
  Handle& h = q.register_handle();
  std::multiset<Key> oracle;
  Rng rng(1234);
  for (int op = 0; op < 20000; ++op) {
    if (rng.below(10) < 6) {
      Key key = rng.below(5000);
      q.insert(h, key, key);
      oracle.insert(key);
    } else {
      Entry e;
      bool ok = q.try_delete_min(h, e);
      REQUIRE(ok == !oracle.empty());
      if (!ok) continue;
      auto it = oracle.find(e.key);
      REQUIRE(it != oracle.end());
      std::uint64_t rank =
          1 + std::distance(oracle.begin(), oracle.lower_bound(e.key));
      REQUIRE(rank <= k + 1);
      oracle.erase(it);
    }
  }
}

TEST_CASE("two alternating handles stay within rank 2k+1") {
  const std::uint64_t k = 8;
  Queue q(opts(k, 2, 11));
  Handle* hs[2] = {&q.register_handle(), &q.register_handle()};
  std::multiset<Key> oracle;
  Rng rng(777);
  for (int op = 0; op < 20000; ++op) {
    Handle& h = *hs[op & 1];
    if (rng.below(10) < 6) {
      Key key = rng.below(5000);
      q.insert(h, key, key);
      oracle.insert(key);
    } else {
      Entry e;
      if (!q.try_delete_min(h, e)) {
        REQUIRE(oracle.size() <= 2 * k);
        continue;
      }
      auto it = oracle.find(e.key);
      REQUIRE(it != oracle.end());
      std::uint64_t rank =
          1 + std::distance(oracle.begin(), oracle.lower_bound(e.key));
      REQUIRE(rank <= 2 * k + 1);
      oracle.erase(it);
    }
  }
}

TEST_CASE("approx_size tracks the insert and delete counters") {
  Queue q(opts(16));
  Handle& h = q.register_handle();
  CHECK(q.approx_size() == 0);
  for (Key k = 0; k < 100; ++k) q.insert(h, k, k);
  CHECK(q.approx_size() == 100);
  Entry e;
  for (int i = 0; i < 40; ++i) REQUIRE(q.try_delete_min(h, e));
  CHECK(q.approx_size() == 60);
  drain(q, h);
  CHECK(q.approx_size() == 0);
}

TEST_CASE("an always-false deletion hook changes nothing") {
  auto run = [](bool with_hook) {
    Queue q(opts(16, 1, 31));
    if (with_hook)
      q.set_needs_deletion_hook([](Key, Payload) { return false; });
    Handle& h = q.register_handle();
    std::vector<Key> deleted;
    Rng rng(404);
    for (int op = 0; op < 5000; ++op) {
      if (rng.below(10) < 6) {
        Key k = rng.below(900);
        q.insert(h, k, k);
      } else {
        Entry e;
        if (q.try_delete_min(h, e)) deleted.push_back(e.key);
      }
    }
    for (Key k : drain(q, h)) deleted.push_back(k);
    return deleted;
  };
  CHECK(run(false) == run(true));
}

TEST_CASE("a deletion hook purges condemned items during restructures") {
  Queue q(opts(0));
  Handle& h = q.register_handle();
  for (Key k = 1; k <= 16; ++k) q.insert(h, k, k);
  q.set_needs_deletion_hook([](Key k, Payload) { return k % 2 == 0; });
  q.insert(h, 17, 17);

  std::vector<Key> got = drain(q, h);
  CHECK(std::is_sorted(got.begin(), got.end()));
  std::vector<Key> odds;
  for (Key k : got)
    if (k % 2 == 1) odds.push_back(k);
  CHECK(odds == std::vector<Key>{1, 3, 5, 7, 9, 11, 13, 15, 17});
  std::set<Key> uniq(got.begin(), got.end());
  CHECK(uniq.size() == got.size());
  // Purged items are inserted-but-never-taken as far as the counters know.
  CHECK(q.approx_size() == 17 - got.size());
  CHECK(q.debug_total_live() == 0);
}

TEST_CASE("a thread with an empty local tree steals through delete_min") {
  Queue q(opts(255, 2));
  Handle& h0 = q.register_handle();
  Handle& h1 = q.register_handle();
  q.insert(h0, 9, 9);
  q.insert(h0, 7, 7);
  q.insert(h0, 4, 4);

  CHECK(drain(q, h1) == std::vector<Key>{4, 7, 9});
  Entry e;
  CHECK_FALSE(q.try_delete_min(h1, e));
  CHECK_FALSE(q.try_delete_min(h0, e));
  CHECK(q.approx_size() == 0);
}

TEST_CASE("registered handles get distinct ids") {
  Queue q(opts(4, 4));
  CHECK(q.register_handle().id() == 0);
  CHECK(q.register_handle().id() == 1);
  CHECK(q.register_handle().id() == 2);
  CHECK(q.register_handle().id() == 3);
  CHECK(q.registered_handles() == 4);
}

TEST_CASE("concurrent handles conserve every inserted item exactly once") {
  const unsigned threads = 4;
  const int ops = 5000;
  Queue q(opts(64, threads, 123));
  std::vector<Handle*> hs;
  for (unsigned t = 0; t < threads; ++t) hs.push_back(&q.register_handle());

  std::vector<std::vector<Key>> inserted(threads), deleted(threads);
  std::vector<std::thread> workers;
  for (unsigned t = 0; t < threads; ++t) {
    workers.emplace_back([&, t] {
      Rng rng(1000 + t);
      std::uint64_t seq = 0;
      for (int op = 0; op < ops; ++op) {
        if (rng.below(10) < 7) {
          Key k = (seq++ << 3) | t;  // globally unique keys
          q.insert(*hs[t], k, k);
          inserted[t].push_back(k);
        } else {
          Entry e;
          if (q.try_delete_min(*hs[t], e)) deleted[t].push_back(e.key);
        }
      }
    });
  }
  for (auto& w : workers) w.join();

  std::multiset<Key> in, out;
  for (auto& v : inserted) in.insert(v.begin(), v.end());
  for (auto& v : deleted) out.insert(v.begin(), v.end());
  for (Key k : testutil::drain_all(q, hs)) out.insert(k);
  CHECK(in == out);
  CHECK(q.approx_size() == 0);
  CHECK(q.debug_total_live() == 0);
}

TEST_CASE("poisoned reclamation keeps results intact") {
  SUBCASE("sequential churn") {
    Queue::Options o = opts(0);
    o.poison_reclamation = true;
    Queue q(o);
    Handle& h = q.register_handle();
    std::vector<Key> keys;
    Rng rng(555);
    for (int i = 0; i < 300; ++i) keys.push_back(rng.below(100000));
    for (Key k : keys) q.insert(h, k, k);
    std::vector<Key> got = drain(q, h);
    std::sort(keys.begin(), keys.end());
    CHECK(got == keys);
  }
  SUBCASE("concurrent churn") {
    const unsigned threads = 2;
    Queue::Options o = opts(16, threads, 321);
    o.poison_reclamation = true;
    Queue q(o);
    std::vector<Handle*> hs;
    for (unsigned t = 0; t < threads; ++t) hs.push_back(&q.register_handle());
    std::vector<std::vector<Key>> inserted(threads), deleted(threads);
    std::vector<std::thread> workers;
    for (unsigned t = 0; t < threads; ++t) {
      workers.emplace_back([&, t] {
        Rng rng(9000 + t);
        std::uint64_t seq = 0;
        for (int op = 0; op < 10000; ++op) {
          if (rng.below(10) < 6) {
            Key k = (seq++ << 1) | t;
            q.insert(*hs[t], k, k);
            inserted[t].push_back(k);
          } else {
            Entry e;
            if (q.try_delete_min(*hs[t], e)) deleted[t].push_back(e.key);
          }
        }
      });
    }
    for (auto& w : workers) w.join();
    std::multiset<Key> in, out;
    for (auto& v : inserted) in.insert(v.begin(), v.end());
    for (auto& v : deleted) out.insert(v.begin(), v.end());
    for (Key k : testutil::drain_all(q, hs)) out.insert(k);
    CHECK(in == out);
    for (Key k : out) CHECK(k != kPoisonKey);
  }
}
