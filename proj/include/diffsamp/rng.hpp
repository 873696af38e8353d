#pragma once

/**
 * Fixed, portable random-number machinery.
 *
 * The generator is xoshiro256** seeded through splitmix64, and uniform
 * doubles are taken from the top 53 bits. Both algorithms are public domain
 * (Blackman & Vigna) and bit-stable across platforms, which is what makes
 * seeded runs reproducible everywhere and usable as cross-language goldens.
 *
 * Per-record seeds are derived by hashing (base seed, record id, step) so the
 * order in which records are processed can never change their outputs.
 */

#include <cstdint>
#include <string_view>

namespace diffsamp {

// One splitmix64 step: advances the state and returns the scrambled output.
inline uint64_t splitmix64_next(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// FNV-1a 64-bit hash, used to fold record ids into seed derivation.
inline uint64_t fnv1a64(std::string_view data) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Deterministic per-record seed from (base seed, record id, step index).
inline uint64_t derive_seed(uint64_t base, std::string_view record_id, uint64_t step) {
  uint64_t state = base;
  uint64_t h = splitmix64_next(state);
  state = h ^ fnv1a64(record_id);
  h = splitmix64_next(state);
  state = h ^ step;
  return splitmix64_next(state);
}

class Xoshiro256ss {
 public:
  explicit Xoshiro256ss(uint64_t seed) {
    uint64_t sm = seed;
    for (auto& word : state_) {
      word = splitmix64_next(sm);
    }
  }

  uint64_t next() {
    const uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform double in [0, 1) from the top 53 bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform double in (lo, hi) — endpoints excluded by redrawing.
  double uniform_open(double lo, double hi) {
    for (;;) {
      const double u = uniform01();
      const double v = lo + u * (hi - lo);
      if (v > lo && v < hi) {
        return v;
      }
    }
  }

 private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  uint64_t state_[4];
};

}  // namespace diffsamp
