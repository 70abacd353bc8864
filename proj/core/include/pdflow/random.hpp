#pragma once

#include <cstdint>
#include <random>

namespace pdflow {

/// Uniform double in [lo, hi) built from raw 64-bit draws, so a given seed
/// yields the same stream on every standard library.
inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * unit;
}

}  // namespace pdflow
