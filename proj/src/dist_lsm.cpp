#include "klsm/dist_lsm.hpp"

#include <algorithm>
#include <cassert>
#include <unordered_set>
#include <vector>

#include "klsm/queue.hpp"
#include "klsm/shared_klsm.hpp"

namespace klsm {

namespace {
// Taken tails tolerated per scan before a rebuild pays for itself.
constexpr std::uint32_t kStaleScanLimit = 32;
}  // namespace

void DistLsm::insert(QueueContext& ctx, Handle& h, SharedKlsm& shared,
                     Item* it) {
  Block* b = new Block(0);
  b->append(it, ctx.hook_ptr());
  b->add_filter_bits(h.bloom_mask_);
  if (b->filled() == 0) {
    // Condemned on arrival by the deletion hook: logically inserted and
    // deleted in one breath, nothing to publish.
    ctx.domain->reclaim_now(h.id_, b, Block::reclaim);
    Item::reclaim(it, *ctx.domain, h.id_);
    return;
  }

  h.consumed_.clear();
  std::uint32_t i = size_.load(std::memory_order_relaxed);
  while (i > 0) {
    Block* prev = blocks_[i - 1].load(std::memory_order_relaxed);
    if (prev->level() > b->level()) break;
    ctx.yield(h.id_, YieldSite::DistMergeStep);
    unsigned lvl = std::max(prev->level(), b->level()) + 1;
    Block* m = merge_blocks(prev, b, lvl, ctx.hook_ptr());
    h.consumed_.push_back(prev);
    ctx.domain->reclaim_now(h.id_, b, Block::reclaim);  // never published
    b = m;
    --i;
  }

  if (b->filled() == 0) {
    // The hook condemned every survivor of the cascade: the inserted item
    // and the consumed blocks' items were all logically deleted already.
    ctx.domain->reclaim_now(h.id_, b, Block::reclaim);
    size_.store(i, std::memory_order_release);
    ctx.yield(h.id_, YieldSite::DistRetireOld);
    for (Block* c : h.consumed_)
      ctx.domain->retire(h.id_, c, Block::reclaim);
    h.consumed_.clear();
    return;
  }

  if (!stays_local(ctx.k, b->level())) {
    shared.insert(ctx, h, b);
    if (ctx.sink) ctx.sink->insert_linearized(h.id_, it->key(), it->payload());
    size_.store(i, std::memory_order_release);
    ctx.yield(h.id_, YieldSite::DistRetireOld);
    for (Block* c : h.consumed_)
      ctx.domain->retire(h.id_, c, Block::reclaim);
    h.consumed_.clear();
    return;
  }

  ctx.yield(h.id_, YieldSite::DistPublishBlock);
  blocks_[i].store(b, std::memory_order_release);
  ctx.yield(h.id_, YieldSite::DistPublishSize);
  size_.store(i + 1, std::memory_order_release);
  // Linearizes at the size store: only now can any find_min or spy reach the
  // item, so a concurrently stamped delete can never predate this insert.
  if (ctx.sink) ctx.sink->insert_linearized(h.id_, it->key(), it->payload());
  ctx.yield(h.id_, YieldSite::DistRetireOld);
  for (Block* c : h.consumed_) ctx.domain->retire(h.id_, c, Block::reclaim);
  h.consumed_.clear();
}

Item* DistLsm::find_min(QueueContext& ctx, Handle& h) {
  for (int pass = 0;; ++pass) {
    std::uint32_t n = size_.load(std::memory_order_relaxed);
    Item* best = nullptr;
    std::uint32_t stale = 0;
    for (std::uint32_t s = 0; s < n; ++s) {
      Block* blk = blocks_[s].load(std::memory_order_relaxed);
      std::uint32_t f = blk->filled();
      while (f > 0 && blk->item(f - 1)->taken()) {
        --f;
        ++stale;
      }
      if (f == 0) continue;
      Item* it = blk->item(f - 1);
      if (!best || it->key() < best->key()) best = it;
    }
    if (stale <= kStaleScanLimit || pass > 0) return best;
    consolidate(ctx, h);
  }
}

bool DistLsm::spy(QueueContext& ctx, Handle& h, const DistLsm& victim,
                  std::uint64_t cap) {
  assert(live_count() == 0);
  // The tree may still hold fully taken blocks; rebuilding retires them
  // before their slots are repurposed for the copies.
  if (size_.load(std::memory_order_relaxed) != 0) consolidate(ctx, h);
  std::uint64_t copied = 0;
  int last_level = static_cast<int>(kMaxLevels) + 1;
  std::uint32_t out = 0;
  for (std::uint32_t i = 0;; ++i) {
    ctx.yield(h.id_, YieldSite::SpySlotRead);
    // Size and slots re-read every round: the victim mutates underneath us.
    if (i >= victim.size_.load(std::memory_order_acquire)) break;
    Block* b = victim.blocks_[i].load(std::memory_order_acquire);
    if (b == nullptr) break;
    int lvl = static_cast<int>(b->level());
    if (lvl >= last_level) continue;  // torn view, keep our level order
    Block* c = b->copy(b->level(), ctx.hook_ptr());
    if (c->filled() == 0) {
      ctx.domain->reclaim_now(h.id_, c, Block::reclaim);
      continue;
    }
    if (copied + c->filled() > cap) {
      ctx.domain->reclaim_now(h.id_, c, Block::reclaim);
      break;
    }
    blocks_[out].store(c, std::memory_order_relaxed);
    ++out;
    copied += c->filled();
    last_level = lvl;
  }
  size_.store(out, std::memory_order_release);
  return out != 0;
}

void DistLsm::consolidate(QueueContext& ctx, Handle& h) {
  ctx.yield(h.id_, YieldSite::DistConsolidate);
  std::uint32_t n = size_.load(std::memory_order_relaxed);

  std::vector<Block*> originals;
  std::vector<Block*> made;
  std::vector<Block*> work;
  originals.reserve(n);
  work.reserve(n);
  for (std::uint32_t s = 0; s < n; ++s) {
    Block* b = blocks_[s].load(std::memory_order_relaxed);
    originals.push_back(b);
    Block* r = b->shrink(ctx.hook_ptr());
    if (r != b) made.push_back(r);
    if (r->filled() != 0) work.push_back(r);
  }

  // Re-merge until levels strictly decrease again.
  std::vector<Block*> out;
  out.reserve(work.size());
  for (Block* b : work) {
    while (!out.empty() && out.back()->level() <= b->level()) {
      unsigned lvl = std::max(out.back()->level(), b->level()) + 1;
      Block* m = merge_blocks(out.back(), b, lvl, ctx.hook_ptr());
      made.push_back(m);
      out.pop_back();
      b = m;
    }
    // A merge can purge everything it touched (hook plus taken filtering);
    // empty results simply vanish.
    if (b->filled() != 0) out.push_back(b);
  }

  publish(ctx, h, out.data(), static_cast<std::uint32_t>(out.size()));

  // Fresh intermediates that did not survive were never published.
  for (Block* m : made)
    if (std::find(out.begin(), out.end(), m) == out.end())
      ctx.domain->reclaim_now(h.id_, m, Block::reclaim);
  for (Block* b : originals)
    if (std::find(out.begin(), out.end(), b) == out.end())
      ctx.domain->retire(h.id_, b, Block::reclaim);
}

void DistLsm::publish(QueueContext& ctx, Handle& h, Block* const* blocks,
                      std::uint32_t count) {
  // Slots land in ascending order before the size store so a concurrent spy
  // always sees a prefix of valid blocks.
  for (std::uint32_t s = 0; s < count; ++s) {
    ctx.yield(h.id_, YieldSite::DistPublishBlock);
    blocks_[s].store(blocks[s], std::memory_order_release);
  }
  ctx.yield(h.id_, YieldSite::DistPublishSize);
  size_.store(count, std::memory_order_release);
}

std::uint64_t DistLsm::live_count() const {
  std::unordered_set<const Item*> seen;
  std::uint32_t n = size_.load(std::memory_order_acquire);
  for (std::uint32_t s = 0; s < n; ++s) {
    Block* b = blocks_[s].load(std::memory_order_acquire);
    std::uint32_t f = b->filled();
    for (std::uint32_t i = 0; i < f; ++i) {
      Item* it = b->item(i);
      if (!it->taken()) seen.insert(it);
    }
  }
  return seen.size();
}

}  // namespace klsm
