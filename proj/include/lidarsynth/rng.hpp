#pragma once

#include <cstdint>

namespace lidarsynth {

// splitmix64; stable across platforms, used everywhere randomness must be
// reproducible from a seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t state = a ^ (0x9e3779b97f4a7c15ULL + (b << 6) + (b >> 2));
  std::uint64_t s2 = splitmix64(state) ^ b;
  return splitmix64(s2);
}

// Small counter-based generator: the sequence depends only on the seed, never
// on call interleaving elsewhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() { return splitmix64(state_); }

  // Uniform in [0, 1).
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n) { return n == 0 ? 0 : next_u64() % n; }

  // Box-Muller, one draw per call; the pair partner is discarded to keep the
  // consumption pattern independent of call parity.
  double normal(double mean, double sigma);

 private:
  std::uint64_t state_;
};

}  // namespace lidarsynth
