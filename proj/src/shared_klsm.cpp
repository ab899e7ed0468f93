#include "klsm/shared_klsm.hpp"

#include <algorithm>
#include <cassert>

#include "klsm/queue.hpp"

namespace klsm {

void BlockArray::reclaim(void* p, ReclamationDomain& d, unsigned slot) {
  BlockArray* a = static_cast<BlockArray*>(p);
  if (d.poison()) {
    for (auto& b : a->blocks) b = Block::poison_block();
    d.quarantine(slot, p, [](void* q) { delete static_cast<BlockArray*>(q); });
  } else {
    delete a;
  }
}

void SharedKlsm::discard_session(QueueContext& ctx, Handle& h) {
  for (Block* b : h.fresh_) ctx.domain->reclaim_now(h.id_, b, Block::reclaim);
  h.fresh_.clear();
  h.replaced_.clear();
  if (h.snapshot_ && !h.snapshot_published_) delete h.snapshot_;
  h.snapshot_ = nullptr;
  h.snapshot_published_ = false;
  h.session_open_ = false;
}

void SharedKlsm::refresh(QueueContext& ctx, Handle& h,
                         const BlockArray* cur) {
  discard_session(ctx, h);
  h.observed_ = cur;
  h.observed_version_ = cur ? cur->version : 0;
  if (cur) {
    ctx.yield(h.id_, YieldSite::SharedSnapshot);
    h.snapshot_ = new BlockArray(*cur);
  }
  h.session_open_ = true;
}

bool SharedKlsm::push_snapshot(QueueContext& ctx, Handle& h) {
  assert(h.session_open_ && !h.snapshot_published_);
  ctx.yield(h.id_, YieldSite::SharedPreCas);
  BlockArray* expected = const_cast<BlockArray*>(h.observed_);
  if (h.snapshot_)
    h.snapshot_->version =
        version_counter_.fetch_add(1, std::memory_order_relaxed) + 1;
  if (shared_.compare_exchange_strong(expected, h.snapshot_,
                                      std::memory_order_acq_rel,
                                      std::memory_order_acquire)) {
    if (ctx.sink) {
      PivotSample s{h.snapshot_, {}, {}, ctx.k};
      if (h.snapshot_) {
        s.candidate_keys = {h.candidate_keys_.data(), h.candidate_keys_.size()};
        s.filled_at_calc = {h.filled_at_calc_.data(),
                            h.filled_at_calc_.size()};
      }
      ctx.sink->publication(h.id_, s);
    }
    for (Block* b : h.replaced_) ctx.domain->retire(h.id_, b, Block::reclaim);
    h.replaced_.clear();
    h.fresh_.clear();  // now owned by the published structure
    if (h.observed_)
      ctx.domain->retire(h.id_, const_cast<BlockArray*>(h.observed_),
                         BlockArray::reclaim);
    h.snapshot_published_ = true;
    // observed_ deliberately stays at the replaced array; the next
    // verification sees the mismatch and refreshes.
    return true;
  }
  if (ctx.sink) ctx.sink->publication_failed(h.id_);
  discard_session(ctx, h);
  return false;
}

void SharedKlsm::note_dropped(QueueContext& ctx, Handle& h, Block* b) {
  if (b == h.protected_) {
    h.protected_consumed_ = true;
    return;
  }
  auto it = std::find(h.fresh_.begin(), h.fresh_.end(), b);
  if (it != h.fresh_.end()) {
    h.fresh_.erase(it);
    ctx.domain->reclaim_now(h.id_, b, Block::reclaim);
  } else {
    h.replaced_.push_back(b);  // published; retired only if the CAS wins
  }
}

void SharedKlsm::ba_insert(QueueContext& ctx, Handle& h, Block* b) {
  BlockArray& a = *h.snapshot_;
  assert(a.size < kArraySlots);
  // After any block of equal level, before the first strictly smaller one:
  // merges then prefer the established block as the tie-winning side.
  std::uint32_t pos = 0;
  while (pos < a.size && a.blocks[pos]->level() >= b->level()) ++pos;
  for (std::uint32_t j = a.size; j > pos; --j) a.blocks[j] = a.blocks[j - 1];
  a.blocks[pos] = b;
  ++a.size;
  ba_consolidate(ctx, h);
}

bool SharedKlsm::ba_consolidate(QueueContext& ctx, Handle& h) {
  BlockArray& a = *h.snapshot_;
  bool merged_any = false;

  // Pass 1: shrink every block; level reductions yield private copies.
  std::uint32_t w = 0;
  for (std::uint32_t i = 0; i < a.size; ++i) {
    Block* b = a.blocks[i];
    if (!b) continue;
    Block* r = b->shrink(ctx.hook_ptr());
    if (r != b) {
      h.fresh_.push_back(r);
      note_dropped(ctx, h, b);
    }
    if (r->filled() == 0) {
      note_dropped(ctx, h, r);
      continue;
    }
    a.blocks[w++] = r;
  }
  for (std::uint32_t i = w; i < a.size; ++i) a.blocks[i] = nullptr;
  a.size = w;

  // Pass 2: stack-fold merges until levels strictly decrease.
  std::uint32_t out = 0;
  for (std::uint32_t i = 0; i < a.size; ++i) {
    Block* b = a.blocks[i];
    while (out > 0 && a.blocks[out - 1]->level() <= b->level()) {
      Block* left = a.blocks[out - 1];
      unsigned lvl = std::max(left->level(), b->level()) + 1;
      Block* m = merge_blocks(left, b, lvl, ctx.hook_ptr());
      merged_any = true;
      h.fresh_.push_back(m);
      note_dropped(ctx, h, left);
      note_dropped(ctx, h, b);
      b = m;
      --out;
    }
    if (b->filled() == 0) {
      note_dropped(ctx, h, b);
      continue;
    }
    a.blocks[out++] = b;
  }
  for (std::uint32_t i = out; i < a.size; ++i) a.blocks[i] = nullptr;
  a.size = out;
  return merged_any;
}

void SharedKlsm::ba_calculate_pivots(QueueContext& ctx, Handle& h) {
  BlockArray& a = *h.snapshot_;
  bool sample = ctx.sink != nullptr;
  if (sample) {
    h.candidate_keys_.clear();
    h.filled_at_calc_.clear();
  }

  // Counting walk over the block tails: pop the k+1 smallest stored keys and
  // remember, per block, the lowest position that was counted. Exact even
  // with duplicate keys, where a key-threshold rule could overshoot.
  struct Cursor {
    Key key;
    std::uint32_t blk;
    std::uint32_t pos;
  };
  auto later = [](const Cursor& x, const Cursor& y) { return x.key > y.key; };
  Cursor heap[kArraySlots];
  unsigned hn = 0;
  for (std::uint32_t i = 0; i < a.size; ++i) {
    std::uint32_t f = a.blocks[i]->filled();
    if (sample) h.filled_at_calc_.push_back(f);
    a.pivots[i] = f;
    if (f == 0) continue;
    heap[hn++] = {a.blocks[i]->item(f - 1)->key(), i, f - 1};
    std::push_heap(heap, heap + hn, later);
  }
  std::uint64_t want = (ctx.k == ~0ull) ? ~0ull : ctx.k + 1;
  while (want > 0 && hn > 0) {
    std::pop_heap(heap, heap + hn, later);
    Cursor c = heap[--hn];
    a.pivots[c.blk] = c.pos;
    if (sample) h.candidate_keys_.push_back(c.key);
    if (c.pos > 0) {
      heap[hn++] = {a.blocks[c.blk]->item(c.pos - 1)->key(), c.blk, c.pos - 1};
      std::push_heap(heap, heap + hn, later);
    }
    --want;
  }
}

Item* SharedKlsm::ba_find_min(QueueContext&, Handle& h) {
  BlockArray& a = *h.snapshot_;
  std::uint32_t ends[kArraySlots];
  std::uint64_t total = 0;
  for (std::uint32_t i = 0; i < a.size; ++i) {
    // Fill counts shrink concurrently; ranges clamp against the pivot.
    std::uint32_t f = a.blocks[i]->filled();
    ends[i] = f;
    if (f > a.pivots[i]) total += f - a.pivots[i];
  }
  if (total == 0) return nullptr;

  Item* cand = nullptr;
  std::uint32_t cand_blk = 0;
  std::uint64_t idx = h.rng_.below(total);
  for (std::uint32_t i = 0; i < a.size; ++i) {
    std::uint64_t span =
        ends[i] > a.pivots[i] ? ends[i] - a.pivots[i] : 0;
    if (idx < span) {
      std::uint32_t p = a.pivots[i] + static_cast<std::uint32_t>(idx);
      cand = a.blocks[i]->item(p);
      // Anything but the tail may sit above untaken smaller keys; fall back
      // to the block minimum when the pick is already dead.
      if (p != ends[i] - 1 && cand->taken()) cand = a.blocks[i]->item(ends[i] - 1);
      cand_blk = i;
      break;
    }
    idx -= span;
  }
  assert(cand != nullptr);
  (void)cand_blk;

  // Blocks whose filter admits this handle may hold its own inserts. The
  // handle's smallest live key sits at or above some admitted block's live
  // minimum, so returning the smaller of the draw and every admitted block's
  // live minimum never skips the handle's own smaller item. The scan past
  // taken tails is unbounded but short-lived: a draw landing on a dead item
  // triggers consolidation, which trims them.
  Item* local = nullptr;
  for (std::uint32_t i = 0; i < a.size; ++i) {
    if (!BloomHasher::may_contain(a.blocks[i]->filter(), h.bloom_mask_))
      continue;
    for (std::uint32_t f = ends[i]; f > 0; --f) {
      Item* it = a.blocks[i]->item(f - 1);
      if (!it->taken()) {
        if (!local || it->key() < local->key()) local = it;
        break;
      }
    }
  }
  if (local && local->key() <= cand->key()) return local;
  return cand;
}

Item* SharedKlsm::find_min(QueueContext& ctx, Handle& h) {
  for (;;) {
    ctx.yield(h.id_, YieldSite::SharedRefresh);
    const BlockArray* cur = shared_.load(std::memory_order_acquire);
    // The verify point is this load: every candidate handed out below was
    // published before it, and nothing published after it is skipped by a
    // delete stamped here.
    if (ctx.sink) ctx.sink->delete_verified(h.id_);
    // The session survives across operations, but only the pointer value: a
    // replaced array can be freed while this handle is unpinned and its
    // address recycled by a newer publication. cur is safe to dereference (it
    // was loaded under the current pin), so its version settles whether the
    // cached snapshot really still describes the published structure.
    bool reusable = h.session_open_ && cur == h.observed_ &&
                    (!cur || cur->version == h.observed_version_);
    if (!reusable) refresh(ctx, h, cur);
    if (!h.observed_) return nullptr;

    Item* it = ba_find_min(ctx, h);
    if (it && !it->taken()) return it;

    // Dead or missing candidate: scrub this snapshot and republish. The dead
    // candidate sits at some block tail, so the shrink pass always trims at
    // least one slot and repeated cleanups terminate.
    ctx.yield(h.id_, YieldSite::SharedCleanup);
    assert(h.snapshot_ && !h.snapshot_published_);
    ba_consolidate(ctx, h);
    if (h.snapshot_->size == 0) {
      assert(h.fresh_.empty());
      delete h.snapshot_;
      h.snapshot_ = nullptr;  // publish emptiness
    } else {
      // Recalculated pivots shrink the candidate ranges past the trimmed
      // tails even when no merge changed the block layout.
      ba_calculate_pivots(ctx, h);
    }
    push_snapshot(ctx, h);  // on failure the session resets and we refresh
  }
}

void SharedKlsm::insert(QueueContext& ctx, Handle& h, Block* b) {
  assert(b->filled() > 0);
  h.protected_ = b;
  for (;;) {
    ctx.yield(h.id_, YieldSite::SharedRefresh);
    refresh(ctx, h, shared_.load(std::memory_order_acquire));
    h.protected_consumed_ = false;
    if (!h.snapshot_) h.snapshot_ = new BlockArray();
    ctx.yield(h.id_, YieldSite::SharedInsertBlock);
    ba_insert(ctx, h, b);
    ba_calculate_pivots(ctx, h);
    if (push_snapshot(ctx, h)) {
      if (h.protected_consumed_)
        ctx.domain->reclaim_now(h.id_, b, Block::reclaim);
      h.protected_ = nullptr;
      h.protected_consumed_ = false;
      return;
    }
    ctx.yield(h.id_, YieldSite::SharedCasRetry);
  }
}

}  // namespace klsm
