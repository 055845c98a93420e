#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace bcpg {

// Draws are hand-rolled on top of mt19937_64 so that seeded runs are
// reproducible independent of the standard library's distribution internals.

inline double uniform01(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

inline double uniform_range(std::mt19937_64& g, double lo, double hi) {
  return lo + (hi - lo) * uniform01(g);
}

inline double normal01(std::mt19937_64& g) {
  double u1 = uniform01(g);
  if (u1 < 1e-300) u1 = 1e-300;
  const double u2 = uniform01(g);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

}  // namespace bcpg
