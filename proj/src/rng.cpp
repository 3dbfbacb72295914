#include "hjm/rng.hpp"

#include <cmath>
#include <numbers>

namespace hjm::rng {

double normal(std::uint64_t k, std::uint64_t counter) {
  const std::uint64_t base = mix(k ^ mix(counter));
  const double u1 = to_unit(mix(base ^ 0x1ULL));
  const double u2 = to_unit(mix(base ^ 0x2ULL));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace hjm::rng
