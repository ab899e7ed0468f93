#pragma once

#include <cstdint>

namespace klsm::bench {

struct ThroughputConfig {
  unsigned threads = 1;
  std::uint64_t k = 0;
  std::uint64_t prefill = 0;
  double duration_s = 1.0;
  double insert_ratio = 0.5;              // probability an op is an insert
  std::uint64_t key_range = 1ull << 31;   // keys drawn uniformly below this
  std::uint64_t seed = 1;
};

struct ThroughputStats {
  std::uint64_t total_ops = 0;      // inserts + delete attempts
  std::uint64_t inserts = 0;
  std::uint64_t deletes = 0;        // successful delete_mins
  std::uint64_t empty_deletes = 0;  // delete_mins that found nothing
  std::uint64_t drained = 0;        // left over after the timed phase
  double elapsed_s = 0.0;
  double ops_per_thread_per_s = 0.0;
  // prefill + inserts == deletes + drained held at shutdown.
  bool conserved = false;
};

// Prefills the queue, then runs `threads` workers for `duration_s`, each
// flipping a ratio-weighted coin between insert(uniform key) and
// try_delete_min. Failed deletes count as operations.
ThroughputStats throughput_run(const ThroughputConfig& cfg);

}  // namespace klsm::bench
