#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <vector>

#include "klsm/bloom.hpp"
#include "klsm/config.hpp"
#include "klsm/context.hpp"
#include "klsm/dist_lsm.hpp"
#include "klsm/execution_hooks.hpp"
#include "klsm/rng.hpp"
#include "klsm/shared_klsm.hpp"

namespace klsm {

class Queue;

// Per-thread access point. A handle belongs to one thread at a time; all of
// its mutable state below is owner-only except the counters and the local
// tree slots other threads read while spying.
class Handle {
 public:
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;

  unsigned id() const { return id_; }

 private:
  friend class Queue;
  friend class DistLsm;
  friend class SharedKlsm;
  friend struct WhiteBox;

  unsigned id_ = 0;
  Rng rng_;
  std::uint64_t bloom_mask_ = 0;
  DistLsm dist_;

  // Current shared-snapshot session. observed_ is only ever compared, never
  // dereferenced after the session that copied it: between operations the
  // handle is unpinned, so the array can be freed and its address handed to a
  // newer publication. Session reuse therefore also checks observed_version_
  // against the (pin-protected) current array's version, which is globally
  // unique per publication. Snapshots are private copies until a successful
  // publication hands them to the structure.
  const BlockArray* observed_ = nullptr;
  std::uint64_t observed_version_ = 0;
  BlockArray* snapshot_ = nullptr;
  bool snapshot_published_ = false;
  bool session_open_ = false;

  // Publication staging: blocks created for the unpublished snapshot, and
  // published blocks the snapshot dropped (retired only if the CAS wins).
  std::vector<Block*> fresh_;
  std::vector<Block*> replaced_;
  Block* protected_ = nullptr;  // caller-owned block being inserted
  bool protected_consumed_ = false;

  // Scratch reused across operations.
  std::vector<Block*> consumed_;
  std::vector<Key> candidate_keys_;
  std::vector<std::uint32_t> filled_at_calc_;

  std::atomic<std::uint64_t> inserted_{0};
  std::atomic<std::uint64_t> taken_{0};
};

// Relaxed concurrent priority queue (minimum first). With T registered
// handles and relaxation k, every delete_min returns an item whose rank among
// the live items at its linearization point is at most T*k + 1, and an empty
// result implies at most T*k live items existed.
class Queue {
 public:
  struct Options {
    std::uint64_t relaxation = 0;  // k
    unsigned max_handles = 1;
    std::uint64_t seed = 1;
    bool poison_reclamation = false;
    // Reuse across queue instances to amortize table setup.
    std::shared_ptr<const BloomTables> bloom_tables;
  };

  explicit Queue(const Options& opt);
  ~Queue();
  Queue(const Queue&) = delete;
  Queue& operator=(const Queue&) = delete;

  // Thread-safe; at most max_handles calls.
  Handle& register_handle();

  void insert(Handle& h, Key key, Payload payload);

  // True with the deleted entry in `out`, false after observing an empty
  // structure. May steal work from other handles' local trees.
  bool try_delete_min(Handle& h, Entry& out);

  // Sum of per-handle insert/delete counters: exact at quiescence, a few
  // operations stale under concurrency. Items purged by the deletion hook
  // stay counted (they are never individually observed being dropped).
  std::uint64_t approx_size() const;

  // Both are quiescent-only switches.
  void set_needs_deletion_hook(DeleteHook hook) { ctx_.hook = std::move(hook); }
  void set_execution_sink(ExecutionSink* sink) { ctx_.sink = sink; }

  std::uint64_t relaxation() const { return ctx_.k; }
  unsigned registered_handles() const {
    return registered_.load(std::memory_order_acquire);
  }

  // Quiescent-only white-box observers for the verification suite.
  const BlockArray* debug_published() const { return shared_.published(); }
  std::uint64_t debug_dist_live(const Handle& h) const;
  std::uint64_t debug_total_live() const;

 private:
  friend struct WhiteBox;
  ReclamationDomain domain_;
  QueueContext ctx_;
  SharedKlsm shared_;
  unsigned max_handles_;
  std::unique_ptr<Handle[]> handles_;
  std::atomic<unsigned> registered_{0};
};

}  // namespace klsm
