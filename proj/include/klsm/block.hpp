#pragma once

#include <cassert>
#include <cstdint>

#include "klsm/config.hpp"
#include "klsm/item.hpp"
#include "klsm/reclamation.hpp"

namespace klsm {

// Fixed-capacity sorted run: up to 2^level item pointers in descending key
// order, so the block minimum sits at the tail. Appends are single-writer and
// happen strictly before the block becomes visible to other threads; after
// publication the only mutation is the tail trim in shrink(), which moves the
// fill count monotonically past taken items and is therefore safe to race
// with readers.
class Block {
 public:
  explicit Block(unsigned level, std::uint64_t filter = 0);
  ~Block();
  Block(const Block&) = delete;
  Block& operator=(const Block&) = delete;

  unsigned level() const { return level_; }
  std::uint32_t capacity() const { return 1u << level_; }
  std::uint32_t filled() const {
    return filled_.load(std::memory_order_acquire);
  }
  // High-water mark of appended slots; unlike filled() it never shrinks.
  std::uint32_t owned() const { return owned_; }
  Item* item(std::uint32_t i) const { return items_[i]; }
  std::uint64_t filter() const { return filter_; }
  void add_filter_bits(std::uint64_t mask) { filter_ |= mask; }

  // Appends unless the item is already taken or condemned by the hook.
  // Pre-publication only; keys must arrive in descending order.
  void append(Item* it, const DeleteHook* hook);

  // Fresh block at the given level holding this block's live items.
  Block* copy(unsigned level, const DeleteHook* hook) const;

  // Trims taken items off the tail in place, then moves the survivors to a
  // fresh smaller block if they fit in half the capacity or less. Returns
  // this when the level is unchanged; the caller owns disposal of the
  // original otherwise.
  Block* shrink(const DeleteHook* hook);

  // Smallest untaken item, skipping the taken tail. Null when none.
  Item* live_min() const;

  static void reclaim(void* p, ReclamationDomain& d, unsigned slot);

  // Shared sentinel whose single item carries the poison marker; reclaimed
  // structures are repointed at it so stale readers observe the marker.
  static Block* poison_block();

 private:
  const unsigned level_;
  std::uint64_t filter_;
  std::uint32_t owned_ = 0;
  std::atomic<std::uint32_t> filled_{0};
  Item** items_;
};

// Two-way merge of b1 and b2 into a fresh block of the given level. Equal
// keys drain from b1 first, so the longer-established run stays ahead of
// newer arrivals.
Block* merge_blocks(const Block* b1, const Block* b2, unsigned level,
                    const DeleteHook* hook);

}  // namespace klsm
