#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace fvmd {

// splitmix64 finalizer. Used both as the generator step and to derive
// per-stream seeds; spelled out here so every platform produces the same
// sequences.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

// Seed for a named substream (one per video, per noise setting, ...).
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view label) {
  return mix64(seed ^ fnv1a64(label));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix64(state_);
  }

  // Uniform in [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Unbiased uniform integer in [0, bound); rejection keeps it exact.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t min = (0 - bound) % bound;
    std::uint64_t r = next_u64();
    while (r < min) r = next_u64();
    return r % bound;
  }

  // Standard normal via Box-Muller (one value per call; the pair's second
  // half is discarded to keep draw counts predictable).
  double normal() {
    double u1 = next_double();
    while (u1 == 0.0) u1 = next_double();
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

  // First m entries of a Fisher-Yates pass over 0..n-1, i.e. a uniform
  // ordered sample without replacement.
  std::vector<std::uint64_t> sample_without_replacement(std::uint64_t n,
                                                        std::uint64_t m);

 private:
  std::uint64_t state_;
};

inline std::vector<std::uint64_t> Rng::sample_without_replacement(
    std::uint64_t n, std::uint64_t m) {
  std::vector<std::uint64_t> pool(n);
  for (std::uint64_t i = 0; i < n; ++i) pool[i] = i;
  if (m > n) m = n;
  for (std::uint64_t i = 0; i < m; ++i) {
    std::swap(pool[i], pool[i + below(n - i)]);
  }
  pool.resize(m);
  return pool;
}

}  // namespace fvmd
