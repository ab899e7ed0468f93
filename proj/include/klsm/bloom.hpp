#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <utility>

namespace klsm {

// Tabulation tables backing the per-block 64-bit filters over inserting
// handle ids. Two independent hashes pick two bit positions per handle;
// block merges union filters with bitwise OR, so a handle whose item might
// live in a block always has both its bits set (no false negatives).
struct BloomTables {
  std::array<std::array<std::array<std::uint64_t, 256>, 8>, 2> t;
};

std::shared_ptr<const BloomTables> make_bloom_tables(std::uint64_t seed);

class BloomHasher {
 public:
  BloomHasher() = default;
  explicit BloomHasher(std::shared_ptr<const BloomTables> tables)
      : tables_(std::move(tables)) {}

  // Two-bit filter mask identifying one inserting handle.
  std::uint64_t mask(std::uint32_t handle_id) const;

  static bool may_contain(std::uint64_t filter, std::uint64_t handle_mask) {
    return (filter & handle_mask) == handle_mask;
  }

 private:
  std::shared_ptr<const BloomTables> tables_;
};

}  // namespace klsm
