#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <vector>

namespace klsm {

class ReclamationDomain;

// Invoked once an object is provably unreachable. Implementations release
// child references (recursing through the domain so poison mode applies
// transitively) and then either free the object or hand it to quarantine.
using ReclaimFn = void (*)(void* p, ReclamationDomain& d, unsigned slot);
using FreeFn = void (*)(void* p);

// Epoch-based deferred reclamation. Readers pin their slot for the duration
// of one structure operation; an object retired at epoch e is reclaimed only
// once the global epoch has advanced twice past e, which implies every reader
// that might have held a reference has since unpinned. Epoch advancement is
// purely opportunistic, so a stalled reader delays reclamation but never
// blocks other threads.
//
// Poison mode defers physical frees to domain teardown: reclaimed objects are
// scribbled with a recognizable marker and parked, so use-after-reclaim reads
// surface as marker values instead of heap corruption.
class ReclamationDomain {
 public:
  explicit ReclamationDomain(unsigned slots, bool poison = false);
  ~ReclamationDomain();
  ReclamationDomain(const ReclamationDomain&) = delete;
  ReclamationDomain& operator=(const ReclamationDomain&) = delete;

  class Guard {
   public:
    Guard(Guard&& o) noexcept : d_(o.d_), slot_(o.slot_) { o.d_ = nullptr; }
    Guard(const Guard&) = delete;
    Guard& operator=(const Guard&) = delete;
    Guard& operator=(Guard&&) = delete;
    ~Guard() {
      if (d_) d_->unpin(slot_);
    }

   private:
    friend class ReclamationDomain;
    Guard(ReclamationDomain* d, unsigned slot) : d_(d), slot_(slot) {}
    ReclamationDomain* d_;
    unsigned slot_;
  };

  // Marks the slot active in the current epoch. One pin per operation;
  // nesting is a caller bug.
  Guard pin(unsigned slot);

  // Defers reclamation of p until no pinned reader can still hold it.
  void retire(unsigned slot, void* p, ReclaimFn fn);

  // Runs the reclaim function immediately. Only valid for objects that were
  // never visible to other threads.
  void reclaim_now(unsigned slot, void* p, ReclaimFn fn) { fn(p, *this, slot); }

  bool poison() const { return poison_; }

  // Parks a scribbled object until teardown (poison mode plumbing; called
  // from reclaim functions).
  void quarantine(unsigned slot, void* p, FreeFn fn);

  // Attempts an epoch advance and reclaims whatever the slot is allowed to.
  void flush(unsigned slot);

  // Reclaims everything outstanding, including quarantined memory. Caller
  // must guarantee no concurrent access and no live pins it cares about.
  void drain_all();

  // Number of reclaim-function invocations so far (observability for tests;
  // read at quiescence).
  std::uint64_t reclaimed_count() const;

 private:
  struct Retired {
    void* p;
    ReclaimFn fn;
    std::uint64_t epoch;
  };
  struct Parked {
    void* p;
    FreeFn fn;
  };
  struct alignas(64) Slot {
    std::atomic<std::uint64_t> announce{0};  // 0 = quiescent, else pinned epoch
    std::vector<Retired> retired;
    std::vector<Parked> quarantined;
    std::size_t collect_mark = 64;
    std::uint64_t reclaimed = 0;
  };

  void unpin(unsigned slot);
  void try_advance();
  void collect(unsigned slot_idx);

  std::atomic<std::uint64_t> epoch_{2};
  std::unique_ptr<Slot[]> slots_;
  unsigned nslots_;
  bool poison_;
};

}  // namespace klsm
