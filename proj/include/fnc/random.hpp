#pragma once

#include <cstdint>
#include <random>

namespace fnc {

using Rng = std::mt19937_64;

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

inline double gaussian(Rng& rng, double stddev) { return std::normal_distribution<double>(0.0, stddev)(rng); }

}  // namespace fnc
