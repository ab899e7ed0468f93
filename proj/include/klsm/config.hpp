#pragma once

#include <cstdint>
#include <functional>

namespace klsm {

using Key = std::uint64_t;
using Payload = std::uint64_t;

// Highest admissible block level; a level-l block holds up to 2^l items.
inline constexpr unsigned kMaxLevels = 32;

// Block-array slot headroom: consolidation may briefly hold one block per
// level plus a carry, and insertion adds one more before merging.
inline constexpr unsigned kArraySlots = kMaxLevels + 2;

// Value scribbled over reclaimed keys when poison reclamation is enabled.
inline constexpr Key kPoisonKey = 0xDEADDEADDEADDEADull;

struct Entry {
  Key key;
  Payload payload;
};

// Optional logical-deletion predicate: items for which it returns true are
// treated as already deleted and dropped the next time a merge or copy
// touches them. The predicate must be monotone (once true for an item it
// stays true) or purged items may resurface in no particular order.
using DeleteHook = std::function<bool(Key, Payload)>;

}  // namespace klsm
