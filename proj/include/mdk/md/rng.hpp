#pragma once

#include <cmath>
#include <cstdint>

#include "mdk/core/units.hpp"

namespace mdk {

/// SplitMix64 finalizer; a bijective hash of a 64-bit word.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based standard normal stream. Draw k depends only on (seed, k), so
/// a stream can be resumed from its counter and splits across threads freely.
struct GaussianStream {
  std::uint64_t seed = 0;
  std::uint64_t counter = 0;

  /// Uniform on (0, 1] from the hashed word (never zero, safe for log).
  static double open_uniform(std::uint64_t word) { return static_cast<double>((word >> 11) + 1) * 0x1.0p-53; }

  double at(std::uint64_t k) const {
    const std::uint64_t key = splitmix64(seed);
    const double u1 = open_uniform(splitmix64(key ^ splitmix64(2 * k)));
    const double u2 = open_uniform(splitmix64(key ^ splitmix64(2 * k + 1)));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * units::pi * u2);
  }

  double next() { return at(counter++); }

  friend bool operator==(const GaussianStream&, const GaussianStream&) = default;
};

}  // namespace mdk
