#pragma once

#include <cmath>

namespace fnc {

/// Glauber transition probability 1 / (1 + exp(beta * delta)).
///
/// Evaluated from the non-negative side so that p(delta) + p(-delta) == 1
/// holds exactly in floating point and p(0) == 0.5.
inline double glauber_acceptance(double delta, double beta) {
  const double x = beta * delta;
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(x));
  return 1.0 - 1.0 / (1.0 + std::exp(-x));
}

}  // namespace fnc
