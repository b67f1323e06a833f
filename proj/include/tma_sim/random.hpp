#pragma once

#include <cstdint>
#include <random>

namespace tma_sim {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Reproducible generator: std::mt19937_64 (its output sequence is fixed by the
/// C++ standard) plus distribution code written out here, because the standard
/// library distributions differ between implementations.
///
/// Stream split: substream i of seed s is seeded with splitmix64(splitmix64(s) ^ i).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static Rng substream(std::uint64_t seed, std::uint64_t index) { return Rng(splitmix64(splitmix64(seed) ^ index)); }

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, upper] by rejection: draw x, reject x >= 2^64 - (2^64 mod (upper+1)), return x mod (upper+1).
  std::uint64_t uniform(std::uint64_t upper) {
    if (upper == UINT64_MAX) return next();
    const std::uint64_t range = upper + 1;
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % range + 1) % range;
    for (;;) {
      const std::uint64_t x = next();
      if (x <= limit) return x % range;
    }
  }

  /// Uniform double in [0, 1) from the top 53 bits.
  double unit() { return static_cast<double>(next() >> 11) * 0x1p-53; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace tma_sim
