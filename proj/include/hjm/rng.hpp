#pragma once

#include <cstdint>

namespace hjm::rng {

// splitmix64 finalizer
constexpr std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t key(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                            std::uint64_t c = 0) {
  return mix(mix(mix(mix(seed) ^ a) ^ b) ^ c);
}

// uniform in the open interval (0, 1)
inline double to_unit(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

inline double uniform(std::uint64_t k, std::uint64_t counter) { return to_unit(mix(k ^ mix(counter))); }

double normal(std::uint64_t k, std::uint64_t counter);

// Sequential draws from one key.
class Stream {
 public:
  explicit Stream(std::uint64_t k) : key_(k) {}
  double uniform() { return rng::uniform(key_, counter_++); }
  double normal() { return rng::normal(key_, counter_++); }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Stream tags
inline constexpr std::uint64_t kBrownian = 0x42524f574eULL;
inline constexpr std::uint64_t kJumps = 0x4a554d5053ULL;
inline constexpr std::uint64_t kValidation = 0x56414c4944ULL;

}  // namespace hjm::rng
