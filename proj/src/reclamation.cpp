#include "klsm/reclamation.hpp"

#include <cassert>

namespace klsm {

ReclamationDomain::ReclamationDomain(unsigned slots, bool poison)
    : slots_(std::make_unique<Slot[]>(slots)), nslots_(slots), poison_(poison) {
  assert(slots > 0);
}

ReclamationDomain::~ReclamationDomain() { drain_all(); }

ReclamationDomain::Guard ReclamationDomain::pin(unsigned slot) {
  Slot& s = slots_[slot];
  assert(s.announce.load(std::memory_order_relaxed) == 0 && "nested pin");
  s.announce.store(epoch_.load(std::memory_order_relaxed),
                   std::memory_order_relaxed);
  // The announcement must be ordered before any shared-pointer read of the
  // guarded section, and advancers must observe it before declaring the
  // epoch quiescent.
  std::atomic_thread_fence(std::memory_order_seq_cst);
  return Guard(this, slot);
}

void ReclamationDomain::unpin(unsigned slot) {
  slots_[slot].announce.store(0, std::memory_order_release);
}

void ReclamationDomain::retire(unsigned slot, void* p, ReclaimFn fn) {
  Slot& s = slots_[slot];
  // The caller's unlinking stores must be globally visible before the tag
  // epoch is read. Without this, the unlink can linger in the store buffer
  // while the epoch advances and a fresh reader pins: the reader still finds
  // p through the stale view, yet its announcement exceeds the tag by enough
  // that the +2 grace period expires with the reader live.
  std::atomic_thread_fence(std::memory_order_seq_cst);
  s.retired.push_back({p, fn, epoch_.load(std::memory_order_relaxed)});
  if (s.retired.size() >= s.collect_mark) {
    try_advance();
    collect(slot);
    s.collect_mark = s.retired.size() + 64;
  }
}

void ReclamationDomain::try_advance() {
  std::atomic_thread_fence(std::memory_order_seq_cst);
  std::uint64_t e = epoch_.load(std::memory_order_acquire);
  for (unsigned i = 0; i < nslots_; ++i) {
    std::uint64_t a = slots_[i].announce.load(std::memory_order_acquire);
    if (a != 0 && a < e) return;  // a reader is still behind
  }
  epoch_.compare_exchange_strong(e, e + 1, std::memory_order_acq_rel);
}

void ReclamationDomain::collect(unsigned slot_idx) {
  Slot& s = slots_[slot_idx];
  std::uint64_t e = epoch_.load(std::memory_order_acquire);
  std::size_t kept = 0;
  for (std::size_t i = 0; i < s.retired.size(); ++i) {
    Retired r = s.retired[i];
    if (r.epoch + 2 <= e) {
      r.fn(r.p, *this, slot_idx);
      ++s.reclaimed;
    } else {
      s.retired[kept++] = r;
    }
  }
  s.retired.resize(kept);
}

void ReclamationDomain::quarantine(unsigned slot, void* p, FreeFn fn) {
  slots_[slot].quarantined.push_back({p, fn});
}

void ReclamationDomain::flush(unsigned slot) {
  try_advance();
  try_advance();
  collect(slot);
}

void ReclamationDomain::drain_all() {
  for (unsigned i = 0; i < nslots_; ++i) {
    Slot& s = slots_[i];
    // Reclaim functions may quarantine more memory; run them all first.
    std::vector<Retired> pending;
    pending.swap(s.retired);
    for (const Retired& r : pending) {
      r.fn(r.p, *this, i);
      ++s.reclaimed;
    }
  }
  for (unsigned i = 0; i < nslots_; ++i) {
    Slot& s = slots_[i];
    for (const Parked& q : s.quarantined) q.fn(q.p);
    s.quarantined.clear();
  }
}

std::uint64_t ReclamationDomain::reclaimed_count() const {
  std::uint64_t total = 0;
  for (unsigned i = 0; i < nslots_; ++i) total += slots_[i].reclaimed;
  return total;
}

}  // namespace klsm
