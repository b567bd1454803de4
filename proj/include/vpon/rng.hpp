#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace vpon {

/// Uniform double in [0, 1). Hand-rolled so results are identical across
/// standard library implementations.
inline double uniform01(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

/// Exponential draw with the given rate. log1p keeps precision near 0.
inline double exp_draw(std::mt19937_64& g, double rate) {
  return -std::log1p(-uniform01(g)) / rate;
}

/// Integer in [0, n). Modulo bias is below 2^-40 for n < 2^24, fine here.
inline int uniform_int(std::mt19937_64& g, int n) {
  return static_cast<int>(g() % static_cast<std::uint64_t>(n));
}

}  // namespace vpon
