#pragma once

// Deterministic random number generation. The standard <random> engines are
// portable but the distributions are not, so all draws (uniform doubles,
// bounded integers, categorical picks, shuffles) are implemented here from
// raw 64-bit outputs. Streams are keyed by mixing (seed, epoch, group, ...)
// components, which makes every draw site independently replayable.

#include <array>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

#include "tcs/common.hpp"

namespace tcs::rng {

inline uint64_t splitmix64(uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline uint64_t splitmix64_next(uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derives a stream key from a seed plus any number of components. Distinct
// component tuples land on distinct streams with overwhelming probability.
inline uint64_t mix(std::initializer_list<uint64_t> parts) {
  uint64_t h = 0x243f6a8885a308d3ULL;
  for (uint64_t p : parts) h = splitmix64(h ^ p);
  return h;
}

// xoshiro256++, state expanded from the seed with splitmix64.
class StreamRng {
 public:
  explicit StreamRng(uint64_t seed) {
    uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64_next(sm);
  }

  uint64_t next_u64() {
    const uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0, 1) with 53 random mantissa bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Unbiased uniform integer in [0, bound) via rejection.
  uint64_t next_below(uint64_t bound) {
    if (bound == 0) throw ValidationError("next_below: bound must be positive");
    const uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const uint64_t r = next_u64();
      if (r >= threshold) return r % bound;
    }
  }

 private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::array<uint64_t, 4> state_;
};

template <typename T>
inline void shuffle(std::vector<T>& items, StreamRng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.next_below(i));
    std::swap(items[i - 1], items[j]);
  }
}

// Categorical draw from probabilities summing to 1; u is uniform in [0, 1).
// Zero-probability entries are never selected (their interval is empty).
inline std::size_t categorical(std::span<const double> probs, double u) {
  if (probs.empty()) throw ValidationError("categorical: empty distribution");
  double cum = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    cum += probs[i];
    if (u < cum) return i;
  }
  // Rounding can leave cum marginally below 1; fall back to the last
  // positive-probability entry.
  for (std::size_t i = probs.size(); i > 0; --i) {
    if (probs[i - 1] > 0.0) return i - 1;
  }
  return probs.size() - 1;
}

}  // namespace tcs::rng
