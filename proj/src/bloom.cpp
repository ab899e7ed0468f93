#include "klsm/bloom.hpp"

#include "klsm/rng.hpp"

namespace klsm {

std::shared_ptr<const BloomTables> make_bloom_tables(std::uint64_t seed) {
  auto tables = std::make_shared<BloomTables>();
  std::uint64_t sm = seed ^ 0xB10F11734B1E5ull;
  for (auto& fn : tables->t)
    for (auto& byte_pos : fn)
      for (auto& cell : byte_pos) cell = splitmix64(sm);
  return tables;
}

std::uint64_t BloomHasher::mask(std::uint32_t handle_id) const {
  std::uint64_t out = 0;
  for (int fn = 0; fn < 2; ++fn) {
    std::uint64_t h = 0;
    std::uint64_t x = handle_id;
    for (int b = 0; b < 8; ++b) {
      h ^= tables_->t[fn][b][x & 0xFF];
      x >>= 8;
    }
    out |= 1ull << (h & 63);
  }
  return out;
}

}  // namespace klsm
