#pragma once

#include <cstdint>
#include <span>

#include "klsm/config.hpp"

namespace klsm {

// Fixed instrumentation points inside queue operations. A scheduling sink can
// treat any subset of these as context-switch opportunities; the enum values
// index into bitmasks, so keep them dense.
enum class YieldSite : std::uint8_t {
  DistMergeStep,      // before a local cascade merge
  DistPublishBlock,   // before a local block-slot store
  DistPublishSize,    // between the slot store and the size store
  DistRetireOld,      // after the size store, before retiring consumed blocks
  DistConsolidate,    // before a local rebuild
  SharedRefresh,      // before (re)reading the shared array pointer
  SharedSnapshot,     // after copying the observed array
  SharedInsertBlock,  // before splicing a block into the snapshot
  SharedPreCas,       // immediately before the publication CAS
  SharedCasRetry,     // after a failed publication, before retrying
  SharedCleanup,      // before consolidating a snapshot with dead candidates
  DeleteSelect,       // at the top of each delete-min candidate round
  DeleteTake,         // immediately before the take attempt
  DeleteTakeRetry,    // after losing a take race
  SpyBegin,           // before choosing a spy victim
  SpySlotRead,        // before each victim slot read
};

inline constexpr unsigned kYieldSiteCount = 16;

const char* yield_site_name(YieldSite site);

inline constexpr std::uint32_t yield_bit(YieldSite s) {
  return 1u << static_cast<unsigned>(s);
}

struct BlockArray;

// Candidate structure captured at the moment a publication succeeded. Spans
// point into per-handle scratch that stays valid for the duration of the
// callback only.
struct PivotSample {
  const BlockArray* array;
  std::span<const Key> candidate_keys;
  std::span<const std::uint32_t> filled_at_calc;  // parallel to array blocks
  std::uint64_t k;
};

// White-box observation surface. All callbacks run on the operating thread at
// the named point; with no sink installed the queue pays one branch per site.
class ExecutionSink {
 public:
  virtual ~ExecutionSink() = default;
  virtual void yield(unsigned /*handle_id*/, YieldSite /*site*/) {}
  virtual void insert_linearized(unsigned /*handle_id*/, Key /*key*/,
                                 Payload /*payload*/) {}
  virtual void delete_verified(unsigned /*handle_id*/) {}
  virtual void delete_linearized(unsigned /*handle_id*/, Key /*key*/,
                                 Payload /*payload*/) {}
  virtual void delete_empty(unsigned /*handle_id*/) {}
  virtual void publication(unsigned /*handle_id*/, const PivotSample&) {}
  virtual void publication_failed(unsigned /*handle_id*/) {}
};

}  // namespace klsm
