#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace drag {

inline constexpr uint64_t kFnvOffsetBasis = 0xcbf29ce484222325ULL;
inline constexpr uint64_t kFnvPrime = 0x100000001b3ULL;

inline uint64_t fnv1a64(const void* data, size_t len, uint64_t h = kFnvOffsetBasis) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= kFnvPrime;
  }
  return h;
}

inline uint64_t fnv1a64(std::string_view s, uint64_t h = kFnvOffsetBasis) {
  return fnv1a64(s.data(), s.size(), h);
}

std::string to_hex64(uint64_t value);

// Seed for one (global seed, diagram, variant) combination:
// FNV-1a-64 over "{global_seed}|{diagram_id}|{variant_name}".
uint64_t stable_seed(uint64_t global_seed, const std::string& diagram_id,
                     const std::string& variant_name);

// SplitMix64. Portable bit-for-bit; the only PRNG used anywhere.
class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double next_real() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). n must be > 0; uses plain modulo.
  uint64_t next_below(uint64_t n) { return next() % n; }

 private:
  uint64_t state_;
};

}  // namespace drag
