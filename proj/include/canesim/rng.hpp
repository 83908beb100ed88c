#pragma once

#include <cstdint>
#include <cmath>

namespace canesim {

// SplitMix64 finalizer. All randomness in the simulator goes through this so
// that runs are reproducible bit-for-bit across reruns and thread counts.
inline std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

// Named streams: drawing from one stream never disturbs another.
enum class Stream : std::uint64_t {
  Population = 0x70e1,
  Perception = 0x9c47,
  Demand = 0x51b3,
  Scenario = 0xe20d,
};

// Keyed sequential generator. The key tuple (seed, stream, a, b) fixes the
// whole sequence, so a generator keyed per farmer and step produces the same
// draws no matter which thread evaluates it.
class Rng {
 public:
  Rng(std::uint64_t seed, Stream stream, std::uint64_t a = 0, std::uint64_t b = 0) {
    state_ = mix64(seed + 0x632be59bd9b4e019ULL);
    state_ = mix64(state_ ^ static_cast<std::uint64_t>(stream));
    state_ = mix64(state_ ^ a);
    state_ = mix64(state_ ^ b);
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

  // [0, 1)
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // inclusive bounds; bias is below 2^-53 for the tiny ranges used here
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(uniform01() * static_cast<double>(hi - lo + 1));
  }

  // Box-Muller without caching, two uniforms per draw
  double gaussian(double mean, double sd) {
    double u1 = 1.0 - uniform01();  // (0, 1]
    double u2 = uniform01();
    double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    return mean + sd * z;
  }

 private:
  std::uint64_t state_;
};

}  // namespace canesim
