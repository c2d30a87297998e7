#pragma once

#include <cstdint>

namespace hjb {

// Counter-based deterministic random stream (splitmix64). Each (seed, stream)
// pair yields an independent sequence, so sample i of a Monte Carlo run always
// sees the same draws no matter how samples are distributed over threads.
class RngStream {
 public:
  explicit RngStream(uint64_t seed, uint64_t stream = 0)
      : state_(mix(mix(seed + 0x9e3779b97f4a7c15ull) ^
                   mix(stream + 0xbf58476d1ce4e5b9ull))) {}

  uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix(state_);
  }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // uniform in {0, ..., n-1}; n must be positive and small
  int uniform_int(int n) {
    return static_cast<int>(next_u64() % static_cast<uint64_t>(n));
  }

 private:
  static uint64_t mix(uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ull;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebull;
    z ^= z >> 31;
    return z;
  }

  uint64_t state_;
};

}  // namespace hjb
