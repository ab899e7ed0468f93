#pragma once

#include <atomic>
#include <cstdint>

#include "klsm/block.hpp"
#include "klsm/context.hpp"

namespace klsm {

class Handle;
class SharedKlsm;

// Thread-local log-structured merge tree. Slots hold blocks in strictly
// decreasing level order; only the owning handle mutates them, other handles
// read concurrently while spying. Blocks whose level outgrows the local
// budget are handed to the shared structure instead.
class DistLsm {
 public:
  DistLsm() = default;
  DistLsm(const DistLsm&) = delete;
  DistLsm& operator=(const DistLsm&) = delete;

  // Owner only. Inserts a fresh item, cascading merges until the level order
  // is restored; oversized results transfer to `shared`.
  void insert(QueueContext& ctx, Handle& h, SharedKlsm& shared, Item* it);

  // Owner only. Smallest untaken local item, null when empty. Rebuilds the
  // tree when the scan skipped enough taken tails to matter.
  Item* find_min(QueueContext& ctx, Handle& h);

  // Owner only, local tree empty. Copies untaken items from the victim, at
  // most `cap` of them, preserving the level-order invariant even when the
  // victim mutates mid-scan. True when anything was obtained.
  bool spy(QueueContext& ctx, Handle& h, const DistLsm& victim,
           std::uint64_t cap);

  // Owner only. Shrinks every block and re-merges level collisions.
  void consolidate(QueueContext& ctx, Handle& h);

  std::uint32_t size() const { return size_.load(std::memory_order_acquire); }
  Block* block(std::uint32_t i) const {
    return blocks_[i].load(std::memory_order_acquire);
  }

  // Quiescent-only observers for teardown and white-box checks.
  std::uint64_t live_count() const;

 private:
  friend struct WhiteBox;
  void publish(QueueContext& ctx, Handle& h, Block* const* blocks,
               std::uint32_t count);

  std::atomic<Block*> blocks_[kArraySlots] = {};
  std::atomic<std::uint32_t> size_{0};
};

}  // namespace klsm
