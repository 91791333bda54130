#pragma once

#include <cstdint>
#include <initializer_list>

namespace nhent {

// splitmix64: tiny 64-bit generator, bit-stable across platforms and
// compilers. Every consumer derives its own stream key with derive_seed,
// so sampling order never depends on scheduling.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform on [0, 1) with 53-bit resolution
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

 private:
  std::uint64_t state_;
};

inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 33;
  z *= 0xff51afd7ed558ccdULL;
  z ^= z >> 33;
  z *= 0xc4ceb9fe1a85ec53ULL;
  z ^= z >> 33;
  return z;
}

// Hash-chains (base, parts...) into a stream key.
inline std::uint64_t derive_seed(std::uint64_t base,
                                 std::initializer_list<std::uint64_t> parts) {
  std::uint64_t s = mix64(base ^ 0x6a09e667f3bcc909ULL);
  for (std::uint64_t p : parts) s = mix64(s ^ (p + 0x9e3779b97f4a7c15ULL));
  return s;
}

}  // namespace nhent
