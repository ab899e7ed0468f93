#pragma once

#include <cstdint>

#include "klsm/bloom.hpp"
#include "klsm/config.hpp"
#include "klsm/execution_hooks.hpp"
#include "klsm/reclamation.hpp"

namespace klsm {

class Handle;

// Shared plumbing threaded through every structural operation.
struct QueueContext {
  std::uint64_t k = 0;
  ReclamationDomain* domain = nullptr;
  ExecutionSink* sink = nullptr;  // installed only by instrumented runs
  DeleteHook hook;                // empty means disabled
  BloomHasher bloom;

  const DeleteHook* hook_ptr() const { return hook ? &hook : nullptr; }

  void yield(unsigned handle_id, YieldSite site) const {
    if (sink) sink->yield(handle_id, site);
  }
};

// A block of this level may stay in a thread-local tree: the local capacities
// below the threshold sum to at most k items.
inline bool stays_local(std::uint64_t k, unsigned level) {
  return level + 1 < 64 && (1ull << (level + 1)) <= k + 1;
}

}  // namespace klsm
