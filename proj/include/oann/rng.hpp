#pragma once

#include <cmath>
#include <cstdint>
#include <istream>
#include <numbers>
#include <ostream>
#include <vector>

#include "oann/serial.hpp"

namespace oann {

// Deterministic, serializable randomness. Every stochastic component draws
// from its own stream derived from (master seed, purpose, salt), so replacing
// one consumer never shifts another consumer's draws and whole runs replay
// bit-identically under a seed.

inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// xoshiro256++ with a 32-byte state.
class Rng {
 public:
  Rng() : Rng(0) {}

  explicit Rng(uint64_t seed) {
    uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64(sm);
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

  /// Uniform draw in [0, n) without modulo bias.
  uint64_t uniform(uint64_t n) {
    if (n == 0) return 0;
    const uint64_t threshold = (0 - n) % n;  // 2^64 mod n
    uint64_t r;
    do {
      r = next_u64();
    } while (r < threshold);
    return r % n;
  }

  /// Uniform double in [0, 1).
  double uniform_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller (one value per call; no carried state).
  double normal() {
    double u1;
    do {
      u1 = uniform_double();
    } while (u1 == 0.0);
    const double u2 = uniform_double();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      const size_t j = static_cast<size_t>(uniform(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  /// Random permutation of [0, n).
  std::vector<uint32_t> permutation(uint32_t n) {
    std::vector<uint32_t> p(n);
    for (uint32_t i = 0; i < n; ++i) p[i] = i;
    shuffle(p);
    return p;
  }

  void save(std::ostream& os) const {
    for (auto word : state_) write_u64(os, word);
  }

  void load(std::istream& is) {
    for (auto& word : state_) word = read_u64(is);
  }

 private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  uint64_t state_[4];
};

/// Derives an independent stream for a named purpose.
inline Rng derive_rng(uint64_t master_seed, uint64_t purpose,
                      uint64_t salt = 0) {
  uint64_t s = master_seed;
  uint64_t a = splitmix64(s);
  s ^= purpose * 0xd6e8feb86659fd93ULL + 0x2545f4914f6cdd1dULL;
  uint64_t b = splitmix64(s);
  s ^= salt * 0xa0761d6478bd642fULL + 0xe7037ed1a0b428dbULL;
  uint64_t c = splitmix64(s);
  return Rng(a ^ (b << 1) ^ (c << 2));
}

// Stream purposes used across the project.
enum class RngPurpose : uint64_t {
  kOramLeaf = 1,
  kOramPerm = 2,
  kOramSetup = 3,
  kSealNonce = 4,
  kPqTrain = 5,
  kGraphBuild = 6,
  kDataset = 7,
  kWorkload = 8,
};

inline Rng derive_rng(uint64_t master_seed, RngPurpose purpose,
                      uint64_t salt = 0) {
  return derive_rng(master_seed, static_cast<uint64_t>(purpose), salt);
}

}  // namespace oann
