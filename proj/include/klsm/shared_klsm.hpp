#pragma once

#include <array>
#include <atomic>
#include <cstdint>

#include "klsm/block.hpp"
#include "klsm/context.hpp"

namespace klsm {

class Handle;

// Snapshot of the shared structure: blocks in strictly decreasing level
// order plus, per block, the start of its candidate range. Immutable once
// published (block fill counts still shrink past taken items, which readers
// tolerate); replaced arrays go through deferred reclamation.
struct BlockArray {
  std::array<Block*, kArraySlots> blocks{};
  std::array<std::uint32_t, kArraySlots> pivots{};
  std::uint32_t size = 0;
  std::uint64_t version = 0;

  // Arrays never own their blocks; block retirement is always explicit.
  static void reclaim(void* p, ReclamationDomain& d, unsigned slot);
};

// Global k-LSM component: one atomic pointer to the current array. Writers
// copy, edit privately, and publish with a single CAS; readers work off their
// copied snapshot and re-verify the pointer before trusting a result.
class SharedKlsm {
 public:
  SharedKlsm() = default;
  SharedKlsm(const SharedKlsm&) = delete;
  SharedKlsm& operator=(const SharedKlsm&) = delete;

  // Splices the block into a fresh snapshot and publishes, retrying on
  // contention until some attempt succeeds. On return the block's items are
  // reachable via the published array.
  void insert(QueueContext& ctx, Handle& h, Block* b);

  // Candidate for the global minimum, or null after observing an empty
  // shared structure. The result may already be taken; callers re-invoke
  // after a failed take. Dead snapshots are scrubbed and republished along
  // the way.
  Item* find_min(QueueContext& ctx, Handle& h);

  const BlockArray* published() const {
    return shared_.load(std::memory_order_acquire);
  }

  // Snapshot machinery, exposed for white-box tests.
  void refresh(QueueContext& ctx, Handle& h, const BlockArray* cur);
  bool push_snapshot(QueueContext& ctx, Handle& h);

 private:
  friend struct WhiteBox;
  void discard_session(QueueContext& ctx, Handle& h);
  void note_dropped(QueueContext& ctx, Handle& h, Block* b);
  void ba_insert(QueueContext& ctx, Handle& h, Block* b);
  bool ba_consolidate(QueueContext& ctx, Handle& h);
  void ba_calculate_pivots(QueueContext& ctx, Handle& h);
  Item* ba_find_min(QueueContext& ctx, Handle& h);

  std::atomic<BlockArray*> shared_{nullptr};
  // Stamps publications with globally unique, strictly increasing versions so
  // a reused array address can never revalidate a stale session.
  std::atomic<std::uint64_t> version_counter_{0};
};

}  // namespace klsm
