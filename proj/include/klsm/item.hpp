#pragma once

#include <atomic>
#include <cstdint>

#include "klsm/config.hpp"
#include "klsm/reclamation.hpp"

namespace klsm {

// One queue entry. Allocated at insert time, referenced by every block copy
// that mentions it, destroyed when the last such block is reclaimed.
class Item {
 public:
  Item(Key key, Payload payload) : key_(key), payload_(payload) {}

  Key key() const { return key_; }
  Payload payload() const { return payload_; }

  // Claims the item for deletion; exactly one caller ever wins.
  bool take() { return !taken_.exchange(true, std::memory_order_acq_rel); }
  bool taken() const { return taken_.load(std::memory_order_acquire); }

  void add_ref() { refs_.fetch_add(1, std::memory_order_relaxed); }
  // True when the caller dropped the last reference and owns disposal.
  bool release_ref() {
    return refs_.fetch_sub(1, std::memory_order_acq_rel) == 1;
  }
  std::uint32_t refs() const { return refs_.load(std::memory_order_acquire); }

  static void reclaim(void* p, ReclamationDomain& d, unsigned slot) {
    Item* it = static_cast<Item*>(p);
    if (d.poison()) {
      it->key_ = kPoisonKey;
      it->payload_ = kPoisonKey;
      d.quarantine(slot, p, [](void* q) { delete static_cast<Item*>(q); });
    } else {
      delete it;
    }
  }

 private:
  Key key_;
  Payload payload_;
  std::atomic<bool> taken_{false};
  std::atomic<std::uint32_t> refs_{0};
};

}  // namespace klsm
