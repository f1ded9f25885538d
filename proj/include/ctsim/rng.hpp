#ifndef CTSIM_RNG_HPP
#define CTSIM_RNG_HPP

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace ctsim {

/// FNV-1a 64-bit over raw bytes. This is the project-wide string hash: token
/// hashing, label-space fingerprints, and seed derivation all use it so that
/// independent implementations can reproduce every derived value.
/// offset basis 14695981039346656037, prime 1099511628211.
constexpr uint64_t fnv1a64(std::string_view bytes) {
  uint64_t h = 14695981039346656037ull;
  for (char c : bytes) {
    h ^= static_cast<uint8_t>(c);
    h *= 1099511628211ull;
  }
  return h;
}

constexpr uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Deterministic child seed for a named purpose ("research_split", "train:3", ...).
constexpr uint64_t derive_seed(uint64_t base, std::string_view tag) {
  return splitmix64(base ^ fnv1a64(tag));
}

/// Deterministic RNG used everywhere randomness is called for. Wraps
/// std::mt19937_64 (whose output sequence the standard pins down) and avoids
/// std::*_distribution, whose output is implementation-defined.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t next_u64() { return gen_(); }

  /// Uniform in [0, n). Modulo reduction; the bias is irrelevant at our scale
  /// and the result depends only on the seed, not the standard library.
  uint64_t below(uint64_t n) { return n <= 1 ? 0 : gen_() % n; }

  /// Uniform double in [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  /// Fisher-Yates in place.
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace ctsim

#endif
