#pragma once

#include <cstdint>

namespace mdiqkd {

// splitmix64 step; also used as a mixing function for stream derivation.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Derive an independent stream id from a base seed and an index, so that
// work items (Monte-Carlo samples, optimizer restarts, sweep points) get
// reproducible streams regardless of how they are scheduled.
inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t s = seed;
  (void)splitmix64(s);
  s ^= 0xD1B54A32D192ED03ull * (index + 1);
  (void)splitmix64(s);
  return s;
}

// Minimal counter-based generator: the state is the derived stream id and
// every next() is one splitmix64 step.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t index)
      : state_(derive_stream(seed, index)) {}

  std::uint64_t next_u64() { return splitmix64(state_); }

  // Uniform in [0, 1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_;
};

}  // namespace mdiqkd
