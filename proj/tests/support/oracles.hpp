#pragma once

// Reference computations used only by tests. Everything here is written the
// slow, direct way and must not call into the code paths it checks.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace fnc::testing {

inline std::vector<double> logistic_orbit(std::size_t n, double x0 = 0.1234567) {
  std::vector<double> xs(n);
  double x = x0;
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = x;
    x = 4.0 * x * (1.0 - x);
  }
  return xs;
}

/// Central differences of f at p with step h on every coordinate.
inline Eigen::VectorXd central_difference(const std::function<double(const Eigen::VectorXd&)>& f,
                                          const Eigen::VectorXd& p, double h = 1e-6) {
  Eigen::VectorXd g(p.size());
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    Eigen::VectorXd hi = p, lo = p;
    hi[i] += h;
    lo[i] -= h;
    g[i] = (f(hi) - f(lo)) / (2.0 * h);
  }
  return g;
}

/// max_i |a_i - b_i| / max(1, |b_i|)
inline double max_relative_deviation(const Eigen::VectorXd& analytic, const Eigen::VectorXd& reference) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < analytic.size(); ++i)
    worst = std::max(worst, std::abs(analytic[i] - reference[i]) / std::max(1.0, std::abs(reference[i])));
  return worst;
}

inline double two_pass_variance(std::span<const double> xs) {
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  return var / static_cast<double>(xs.size());
}

struct ScanResult {
  bool found = false;
  std::size_t position = 0;
  double threshold = 0.0;
  double cost = std::numeric_limits<double>::infinity();
};

/// Exhaustive scan: every admissible position, variances recomputed from scratch.
inline ScanResult exhaustive_split(std::span<const double> sorted, std::size_t min_count) {
  ScanResult best;
  const std::size_t n = sorted.size();
  for (std::size_t p = min_count; p + min_count <= n; ++p) {
    if (!(sorted[p - 1] < sorted[p])) continue;
    const double cost = two_pass_variance(sorted.subspan(0, p)) + two_pass_variance(sorted.subspan(p));
    if (cost < best.cost) best = {true, p, 0.5 * (sorted[p - 1] + sorted[p]), cost};
  }
  return best;
}

/// Direct lag scan of the empirical autocorrelation.
inline int autocorrelation_scan(std::span<const double> xs) {
  const std::size_t n = xs.size();
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(n);
  double c0 = 0.0;
  for (double x : xs) c0 += (x - mean) * (x - mean);
  c0 /= static_cast<double>(n);
  if (c0 == 0.0) return 1;
  const double tol = 3.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t k = 1; k <= n / 2; ++k) {
    double ck = 0.0;
    for (std::size_t t = 0; t + k < n; ++t) ck += (xs[t] - mean) * (xs[t + k] - mean);
    const double rho = ck / static_cast<double>(n - k) / c0;
    if (std::abs(rho) <= tol || std::abs(rho - 1.0) <= tol) return static_cast<int>(k);
  }
  return 1;
}

}  // namespace fnc::testing
