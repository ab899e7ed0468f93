#include "klsm/block.hpp"

namespace klsm {

Block::Block(unsigned level, std::uint64_t filter)
    : level_(level), filter_(filter) {
  assert(level < kMaxLevels);
  items_ = new Item*[capacity()];
}

Block::~Block() { delete[] items_; }

void Block::append(Item* it, const DeleteHook* hook) {
  if (it->taken()) return;
  if (hook && (*hook)(it->key(), it->payload())) return;
  assert(owned_ < capacity());
  assert(owned_ == 0 || items_[owned_ - 1]->key() >= it->key());
  items_[owned_] = it;
  it->add_ref();
  ++owned_;
  filled_.store(owned_, std::memory_order_release);
}

Block* Block::copy(unsigned level, const DeleteHook* hook) const {
  Block* out = new Block(level, filter_);
  std::uint32_t f = filled();
  for (std::uint32_t i = 0; i < f; ++i) out->append(items_[i], hook);
  return out;
}

Block* Block::shrink(const DeleteHook* hook) {
  std::uint32_t f = filled();
  while (f > 0 && items_[f - 1]->taken()) --f;
  filled_.store(f, std::memory_order_release);

  unsigned l = level_;
  while (l > 0 && f <= (1u << (l - 1))) --l;
  if (l == level_) return this;

  Block* c = copy(l, hook);
  Block* r = c->shrink(hook);
  if (r != c) {
    // The copy dropped interior items and the survivors fit a smaller level
    // still. It was never published and every item it references is still
    // held by this block, so the plain delete cannot orphan anything.
    for (std::uint32_t i = 0; i < c->owned_; ++i) {
      bool last = c->items_[i]->release_ref();
      assert(!last);
      (void)last;
    }
    delete c;
  }
  return r;
}

Item* Block::live_min() const {
  std::uint32_t f = filled();
  while (f > 0) {
    Item* it = items_[f - 1];
    if (!it->taken()) return it;
    --f;
  }
  return nullptr;
}

void Block::reclaim(void* p, ReclamationDomain& d, unsigned slot) {
  Block* b = static_cast<Block*>(p);
  for (std::uint32_t i = 0; i < b->owned_; ++i) {
    Item* it = b->items_[i];
    if (it->release_ref()) Item::reclaim(it, d, slot);
  }
  if (d.poison()) {
    Block* marker = poison_block();
    for (std::uint32_t i = 0; i < b->owned_; ++i)
      b->items_[i] = marker->items_[0];
    d.quarantine(slot, p, [](void* q) { delete static_cast<Block*>(q); });
  } else {
    delete b;
  }
}

Block* Block::poison_block() {
  static Block* b = [] {
    Block* blk = new Block(0);
    blk->append(new Item(kPoisonKey, kPoisonKey), nullptr);
    return blk;
  }();
  return b;
}

Block* merge_blocks(const Block* b1, const Block* b2, unsigned level,
                    const DeleteHook* hook) {
  assert(level < kMaxLevels);
  Block* out = new Block(level, b1->filter() | b2->filter());
  std::uint32_t f1 = b1->filled(), f2 = b2->filled();
  std::uint32_t i = 0, j = 0;
  while (i < f1 && j < f2) {
    if (b1->item(i)->key() >= b2->item(j)->key())
      out->append(b1->item(i++), hook);
    else
      out->append(b2->item(j++), hook);
  }
  while (i < f1) out->append(b1->item(i++), hook);
  while (j < f2) out->append(b2->item(j++), hook);
  return out;
}

}  // namespace klsm
