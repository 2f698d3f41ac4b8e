#pragma once

// Phase-space partition reconstruction of a scalar map x_{t+1} = g(x_t):
// variance-minimizing recursive partition of the state interval, Gaussian
// block memberships, and piecewise constant / linear approximants of g.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "fnc/train_config.hpp"

namespace fnc::series {

inline constexpr std::size_t kDefaultMinCount = 16;
inline constexpr double kVarianceFloor = 1e-8;

struct TimeSeries {
  std::vector<double> values;
  int dim = 1;

  /// dim x K matrix; column k holds (x_{k*dim}, ..., x_{k*dim + dim - 1}).
  /// Samples that do not fill a whole column are dropped.
  Eigen::MatrixXd vectorized() const;
};

/// Affine map of raw samples into the unit interval, stored with each model
/// so that predictions can be reported in the original units.
struct Rescaling {
  double offset = 0.0;
  double scale = 1.0;

  double to_unit(double x) const { return (x - offset) / scale; }
  double from_unit(double u) const { return offset + scale * u; }
  std::vector<double> to_unit(std::span<const double> xs) const;

  /// Maps [min, max] onto [margin, 1 - margin].
  static Rescaling fit(std::span<const double> values, double margin = 0.05);
};

/// Characteristic dimension: the first lag k >= 1 at which the empirical
/// autocorrelation is within 3/sqrt(n) of zero. A series that instead
/// recurs (autocorrelation within 3/sqrt(n) of one) before decorrelating
/// reports that recurrence lag. Constant series and series that do neither
/// up to lag n/2 report 1. Throws DataError for n < 4.
int estimate_dimension(std::span<const double> series);

struct Block {
  double lower = 0.0;  // inclusive
  double upper = 0.0;  // exclusive, except for the last block of a partition
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;
};

class Partition {
 public:
  Partition() = default;
  explicit Partition(std::vector<Block> blocks);

  const std::vector<Block>& blocks() const { return blocks_; }
  std::size_t size() const { return blocks_.size(); }
  bool empty() const { return blocks_.empty(); }
  const Block& operator[](std::size_t i) const { return blocks_[i]; }

  /// Index of the block whose interval holds x; values outside the covered
  /// range go to the nearest end block.
  std::size_t locate(double x) const;

 private:
  std::vector<Block> blocks_;
};

struct Split {
  std::size_t position = 0;  // number of points left of the threshold
  double threshold = 0.0;
  double cost = 0.0;         // sigma_L^2 + sigma_R^2
};

/// Best admissible split of sorted data: thresholds at midpoints between
/// consecutive distinct values, both sides holding at least min_count points,
/// smallest threshold on ties. Empty when no admissible split exists.
std::optional<Split> best_split(std::span<const double> sorted, std::size_t min_count);

/// One node of the recursion: the segment [begin, end) of the sorted input
/// and the split taken there (empty for leaves).
struct SplitRecord {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::optional<Split> split;
};

Partition build_partition(std::span<const double> sorted, std::size_t min_count = kDefaultMinCount,
                          double variance_floor = kVarianceFloor, std::vector<SplitRecord>* trace = nullptr);

/// Normalized Gaussian memberships P_alpha(x), evaluated with the largest
/// exponent subtracted first.
Eigen::VectorXd membership(double x, const Partition& partition);

enum class ModelMode { constant, linear };

struct PiecewiseModel {
  Partition partition;
  ModelMode mode = ModelMode::constant;
  // constant: (f_1..f_M); linear: (a_1..a_M, b_1..b_M)
  Eigen::VectorXd coeffs;

  std::size_t coefficient_count() const {
    return mode == ModelMode::constant ? partition.size() : 2 * partition.size();
  }
  void validate() const;
};

double eval_model(const PiecewiseModel& model, double x);

/// E = sum_i (x_{i+1} - f(x_i))^2 over consecutive pairs.
double training_error(const PiecewiseModel& model, std::span<const double> series);

/// dE/dcoeffs in the layout of PiecewiseModel::coeffs.
Eigen::VectorXd error_gradient(const PiecewiseModel& model, std::span<const double> series);

/// Starting point for fit(): per-block least squares on hard block assignment.
PiecewiseModel initial_model(std::span<const double> series, const Partition& partition, ModelMode mode);

/// Step size below which gradient descent on E cannot increase the error:
/// 1 / (|Phi|_1 |Phi|_inf), an upper bound on 1 / lambda_max(Phi^T Phi).
double stable_step(std::span<const double> series, const Partition& partition, ModelMode mode);

struct FitResult {
  PiecewiseModel model;
  double initial_error = 0.0;
  double final_error = 0.0;
  std::vector<double> error_trace;  // one entry per iteration (per sweep for Monte Carlo)
};

/// Minimizes E starting from initial_model(), by gradient descent with the
/// decaying step eta(k) or by a Glauber Monte Carlo walk. Returns the best
/// model seen, so final_error <= initial_error. Throws DivergenceError when
/// the error becomes non-finite.
FitResult fit(std::span<const double> series, const Partition& partition, ModelMode mode, const TrainConfig& cfg);

}  // namespace fnc::series
