#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace fnc {

enum class TrainMethod { gradient, monte_carlo };

/// Shared optimizer settings for the Hertz model, the layered net and the
/// autoencoder stages.
struct TrainConfig {
  double eta0 = 0.01;
  double decay_tau = 1000.0;
  int max_iters = 1000;
  std::uint64_t seed = 0;
  TrainMethod method = TrainMethod::gradient;

  // Monte Carlo only: inverse temperature beta(k) = beta0 * beta_growth^k and
  // the standard deviation of the Gaussian coefficient perturbation.
  double beta0 = 1.0;
  double beta_growth = 1.0;
  double proposal_scale = 0.05;

  double eta(int k) const { return eta0 / (1.0 + static_cast<double>(k) / decay_tau); }
  double beta(int k) const { return beta0 * std::pow(beta_growth, k); }

  void validate() const {
    if (!(eta0 > 0.0) || !(decay_tau > 0.0)) throw std::invalid_argument("eta0 and decay_tau must be positive");
    if (max_iters < 0) throw std::invalid_argument("max_iters must be non-negative");
    if (!(beta0 > 0.0) || !(beta_growth >= 1.0)) throw std::invalid_argument("need beta0 > 0 and beta_growth >= 1");
    if (!(proposal_scale > 0.0)) throw std::invalid_argument("proposal_scale must be positive");
  }
};

}  // namespace fnc
