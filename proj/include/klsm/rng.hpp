#pragma once

#include <cstdint>

namespace klsm {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// xoroshiro128++, one instance per handle. Not cryptographic; fast enough to
// sit on the delete_min hot path.
class Rng {
 public:
  Rng() : Rng(1) {}
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    s0_ = splitmix64(sm);
    s1_ = splitmix64(sm);
    if (s0_ == 0 && s1_ == 0) s1_ = 1;
  }

  std::uint64_t next() {
    std::uint64_t a = s0_, b = s1_;
    std::uint64_t r = rotl(a + b, 17) + a;
    b ^= a;
    s0_ = rotl(a, 49) ^ b ^ (b << 21);
    s1_ = rotl(b, 28);
    return r;
  }

  // Uniform draw from [0, bound). bound must be nonzero.
  std::uint64_t below(std::uint64_t bound) {
    std::uint64_t zone = (~0ull / bound) * bound;
    std::uint64_t r;
    do {
      r = next();
    } while (r >= zone);
    return r % bound;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t s0_;
  std::uint64_t s1_;
};

}  // namespace klsm
