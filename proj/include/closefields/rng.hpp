#pragma once

#include <cstdint>

namespace closefields {

// SplitMix64. Used instead of <random> distributions so that seeded runs are
// bit-identical across standard library implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, bound). Rejection sampling keeps it unbiased.
  uint64_t below(uint64_t bound) {
    if (bound <= 1) return 0;
    const uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    uint64_t x;
    do {
      x = next();
    } while (x >= limit);
    return x % bound;
  }

  Rng fork(uint64_t stream) const { return Rng(state_ ^ (0xd1b54a32d192ed03ULL * (stream + 1))); }

 private:
  uint64_t state_;
};

}  // namespace closefields
