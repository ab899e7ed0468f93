#include "klsm/queue.hpp"

#include <cassert>
#include <unordered_set>

namespace klsm {

const char* yield_site_name(YieldSite site) {
  switch (site) {
    case YieldSite::DistMergeStep: return "dist_merge_step";
    case YieldSite::DistPublishBlock: return "dist_publish_block";
    case YieldSite::DistPublishSize: return "dist_publish_size";
    case YieldSite::DistRetireOld: return "dist_retire_old";
    case YieldSite::DistConsolidate: return "dist_consolidate";
    case YieldSite::SharedRefresh: return "shared_refresh";
    case YieldSite::SharedSnapshot: return "shared_snapshot";
    case YieldSite::SharedInsertBlock: return "shared_insert_block";
    case YieldSite::SharedPreCas: return "shared_pre_cas";
    case YieldSite::SharedCasRetry: return "shared_cas_retry";
    case YieldSite::SharedCleanup: return "shared_cleanup";
    case YieldSite::DeleteSelect: return "delete_select";
    case YieldSite::DeleteTake: return "delete_take";
    case YieldSite::DeleteTakeRetry: return "delete_take_retry";
    case YieldSite::SpyBegin: return "spy_begin";
    case YieldSite::SpySlotRead: return "spy_slot_read";
  }
  return "unknown";
}

Queue::Queue(const Options& opt)
    : domain_(opt.max_handles ? opt.max_handles : 1, opt.poison_reclamation),
      max_handles_(opt.max_handles ? opt.max_handles : 1),
      handles_(std::make_unique<Handle[]>(max_handles_)) {
  ctx_.k = opt.relaxation;
  ctx_.domain = &domain_;
  ctx_.bloom = BloomHasher(opt.bloom_tables ? opt.bloom_tables
                                            : make_bloom_tables(opt.seed));
  std::uint64_t sm = opt.seed ^ 0x5EEDF00D5EEDF00Dull;
  for (unsigned i = 0; i < max_handles_; ++i) {
    Handle& h = handles_[i];
    h.id_ = i;
    h.rng_ = Rng(splitmix64(sm));
    h.bloom_mask_ = ctx_.bloom.mask(i);
  }
}

Queue::~Queue() {
  // Single-threaded teardown: collect each reachable block exactly once,
  // then drain whatever was already queued for deferred reclamation.
  std::unordered_set<Block*> seen;
  auto grab = [&](Block* b) {
    if (b && seen.insert(b).second) domain_.reclaim_now(0, b, Block::reclaim);
  };

  const BlockArray* a = shared_.published();
  if (a) {
    for (std::uint32_t i = 0; i < a->size; ++i) grab(a->blocks[i]);
    domain_.reclaim_now(0, const_cast<BlockArray*>(a), BlockArray::reclaim);
  }
  for (unsigned hi = 0; hi < max_handles_; ++hi) {
    Handle& h = handles_[hi];
    std::uint32_t n = h.dist_.size();
    for (std::uint32_t s = 0; s < n; ++s) grab(h.dist_.block(s));
    // A fiber parked mid-operation can leave a cascade or snapshot session
    // half staged; those blocks are unreachable from the structures above.
    for (Block* b : h.consumed_) grab(b);
    h.consumed_.clear();
    for (Block* b : h.fresh_) grab(b);
    h.fresh_.clear();
    h.replaced_.clear();
    if (h.snapshot_ && !h.snapshot_published_) delete h.snapshot_;
    h.snapshot_ = nullptr;
  }
  domain_.drain_all();
}

Handle& Queue::register_handle() {
  unsigned n = registered_.fetch_add(1, std::memory_order_acq_rel);
  assert(n < max_handles_);
  return handles_[n];
}

void Queue::insert(Handle& h, Key key, Payload payload) {
  auto g = domain_.pin(h.id_);
  Item* it = new Item(key, payload);
  h.dist_.insert(ctx_, h, shared_, it);
  h.inserted_.fetch_add(1, std::memory_order_relaxed);
}

bool Queue::try_delete_min(Handle& h, Entry& out) {
  auto g = domain_.pin(h.id_);
  bool spied = false;
  for (;;) {
    ctx_.yield(h.id_, YieldSite::DeleteSelect);
    Item* local = h.dist_.find_min(ctx_, h);
    Item* remote = shared_.find_min(ctx_, h);
    Item* pick;
    if (!local)
      pick = remote;
    else if (!remote)
      pick = local;
    else
      pick = remote->key() < local->key() ? remote : local;  // ties stay local

    if (!pick) {
      unsigned reg = registered_.load(std::memory_order_acquire);
      if (!spied && reg > 1) {
        ctx_.yield(h.id_, YieldSite::SpyBegin);
        spied = true;
        std::uint64_t r = h.rng_.below(reg - 1);
        unsigned victim = static_cast<unsigned>(r >= h.id_ ? r + 1 : r);
        if (h.dist_.spy(ctx_, h, handles_[victim].dist_, ctx_.k)) continue;
      }
      if (ctx_.sink) ctx_.sink->delete_empty(h.id_);
      return false;
    }

    ctx_.yield(h.id_, YieldSite::DeleteTake);
    if (pick->take()) {
      out = {pick->key(), pick->payload()};
      if (ctx_.sink) ctx_.sink->delete_linearized(h.id_, out.key, out.payload);
      h.taken_.fetch_add(1, std::memory_order_relaxed);
      return true;
    }
    ctx_.yield(h.id_, YieldSite::DeleteTakeRetry);
  }
}

std::uint64_t Queue::approx_size() const {
  std::uint64_t ins = 0, del = 0;
  unsigned reg = registered_.load(std::memory_order_acquire);
  for (unsigned i = 0; i < reg; ++i) {
    ins += handles_[i].inserted_.load(std::memory_order_relaxed);
    del += handles_[i].taken_.load(std::memory_order_relaxed);
  }
  return ins >= del ? ins - del : 0;
}

std::uint64_t Queue::debug_dist_live(const Handle& h) const {
  return h.dist_.live_count();
}

std::uint64_t Queue::debug_total_live() const {
  std::unordered_set<const Item*> seen;
  auto scan = [&](Block* b) {
    std::uint32_t f = b->filled();
    for (std::uint32_t i = 0; i < f; ++i) {
      Item* it = b->item(i);
      if (!it->taken()) seen.insert(it);
    }
  };
  if (const BlockArray* a = shared_.published())
    for (std::uint32_t i = 0; i < a->size; ++i) scan(a->blocks[i]);
  for (unsigned hi = 0; hi < max_handles_; ++hi) {
    const DistLsm& d = handles_[hi].dist_;
    std::uint32_t n = d.size();
    for (std::uint32_t s = 0; s < n; ++s) scan(d.block(s));
  }
  return seen.size();
}

}  // namespace klsm
