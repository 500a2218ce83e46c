#pragma once

#include <cstdint>

namespace embcomm {

// Counter-based pseudo-random generator (SplitMix64). The state advances by a
// fixed odd constant, and each output is a bijective 64-bit mix of the state,
// so the n-th draw is a pure function of (seed, n). All randomized code in
// this library draws from this generator; the algorithm is fixed so results
// are reproducible across platforms.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1), 53 random bits.
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

// Seed of independent stream `index` under `master`. Distinct indices map to
// distinct seeds (odd-multiple offset followed by a bijective mix), so trial
// or epoch t can be replayed in isolation.
inline std::uint64_t substream_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + (index + 1) * 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Name recorded in reports that carry randomized results.
inline constexpr const char* kRngAlgorithm = "splitmix64";

}  // namespace embcomm
