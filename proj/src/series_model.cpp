#include "fnc/series_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "fnc/anneal.hpp"
#include "fnc/error.hpp"
#include "fnc/random.hpp"

namespace fnc::series {

Eigen::MatrixXd TimeSeries::vectorized() const {
  if (dim < 1) throw std::invalid_argument("series dimension must be >= 1");
  const Eigen::Index cols = static_cast<Eigen::Index>(values.size()) / dim;
  Eigen::MatrixXd out(dim, cols);
  for (Eigen::Index k = 0; k < cols; ++k)
    for (int m = 0; m < dim; ++m) out(m, k) = values[k * dim + m];
  return out;
}

std::vector<double> Rescaling::to_unit(std::span<const double> xs) const {
  std::vector<double> out(xs.size());
  std::transform(xs.begin(), xs.end(), out.begin(), [this](double x) { return to_unit(x); });
  return out;
}

Rescaling Rescaling::fit(std::span<const double> values, double margin) {
  if (values.empty()) throw DataError("cannot rescale an empty series");
  if (!(margin >= 0.0 && margin < 0.5)) throw std::invalid_argument("rescaling margin must be in [0, 0.5)");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double range = *hi - *lo;
  if (range <= 0.0) return {*lo - 0.5, 1.0};
  const double scale = range / (1.0 - 2.0 * margin);
  return {*lo - margin * scale, scale};
}

int estimate_dimension(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 4) throw DataError("estimate_dimension needs at least 4 samples");
  const double mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(n);
  double var = 0.0;
  for (double x : series) var += (x - mean) * (x - mean);
  var /= static_cast<double>(n);
  if (!(var > 1e-300) || var <= 1e-24 * mean * mean) return 1;

  const double tol = 3.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t k = 1; k <= n / 2; ++k) {
    double acc = 0.0;
    for (std::size_t t = 0; t + k < n; ++t) acc += (series[t] - mean) * (series[t + k] - mean);
    const double rho = acc / (static_cast<double>(n - k) * var);
    if (std::abs(rho) <= tol || rho >= 1.0 - tol) return static_cast<int>(k);
  }
  return 1;
}

Partition::Partition(std::vector<Block> blocks) : blocks_(std::move(blocks)) {
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    if (!(blocks_[i].lower < blocks_[i].upper)) throw std::invalid_argument("block interval must be non-empty");
    if (i > 0 && blocks_[i].lower != blocks_[i - 1].upper) throw std::invalid_argument("blocks must be contiguous");
  }
}

std::size_t Partition::locate(double x) const {
  if (blocks_.empty()) throw std::logic_error("locate on empty partition");
  // First block whose lower bound exceeds x, minus one.
  auto it = std::upper_bound(blocks_.begin(), blocks_.end(), x,
                             [](double v, const Block& b) { return v < b.lower; });
  if (it == blocks_.begin()) return 0;
  return static_cast<std::size_t>(std::distance(blocks_.begin(), it)) - 1;
}

namespace {

double split_threshold(double a, double b) {
  const double t = a + 0.5 * (b - a);
  // Adjacent doubles: the midpoint can round onto the left value.
  return t > a ? t : b;
}

}  // namespace

std::optional<Split> best_split(std::span<const double> sorted, std::size_t min_count) {
  const std::size_t n = sorted.size();
  if (min_count < 1 || n < 2 * min_count) return std::nullopt;

  // Shifted prefix sums in extended precision; population variances.
  const long double shift = sorted[n / 2];
  std::vector<long double> s1(n + 1, 0.0L), s2(n + 1, 0.0L);
  for (std::size_t i = 0; i < n; ++i) {
    const long double y = sorted[i] - shift;
    s1[i + 1] = s1[i] + y;
    s2[i + 1] = s2[i] + y * y;
  }
  auto variance = [&](std::size_t b, std::size_t e) {
    const long double cnt = static_cast<long double>(e - b);
    const long double m = (s1[e] - s1[b]) / cnt;
    const long double v = (s2[e] - s2[b]) / cnt - m * m;
    return v > 0.0L ? v : 0.0L;
  };

  std::optional<Split> best;
  long double best_cost = std::numeric_limits<long double>::infinity();
  for (std::size_t p = min_count; p + min_count <= n; ++p) {
    if (!(sorted[p - 1] < sorted[p])) continue;
    const long double cost = variance(0, p) + variance(p, n);
    if (cost < best_cost) {
      best_cost = cost;
      best = Split{p, split_threshold(sorted[p - 1], sorted[p]), static_cast<double>(cost)};
    }
  }
  return best;
}

namespace {

Block make_block(std::span<const double> members, double lower, double upper, double floor) {
  const double n = static_cast<double>(members.size());
  const double mean = std::accumulate(members.begin(), members.end(), 0.0) / n;
  double var = 0.0;
  for (double x : members) var += (x - mean) * (x - mean);
  var /= n;
  return Block{lower, upper, members.size(), mean, std::max(var, floor)};
}

void split_recursive(std::span<const double> all, std::size_t begin, std::size_t end, double lower, double upper,
                     std::size_t min_count, double floor, std::vector<Block>& out,
                     std::vector<SplitRecord>* trace) {
  auto seg = all.subspan(begin, end - begin);
  const auto split = best_split(seg, min_count);
  if (trace) trace->push_back({begin, end, split});
  if (!split) {
    out.push_back(make_block(seg, lower, upper, floor));
    return;
  }
  const std::size_t mid = begin + split->position;
  split_recursive(all, begin, mid, lower, split->threshold, min_count, floor, out, trace);
  split_recursive(all, mid, end, split->threshold, upper, min_count, floor, out, trace);
}

}  // namespace

Partition build_partition(std::span<const double> sorted, std::size_t min_count, double variance_floor,
                          std::vector<SplitRecord>* trace) {
  if (min_count < 2) throw std::invalid_argument("min_count must be >= 2");
  if (sorted.size() < min_count) throw DataError("fewer data points than min_count");
  if (!std::is_sorted(sorted.begin(), sorted.end())) throw std::invalid_argument("partition data must be sorted");
  const double lower = std::min(0.0, sorted.front());
  double upper = std::max(1.0, sorted.back());
  if (!(upper > lower)) upper = std::nextafter(lower, std::numeric_limits<double>::infinity());
  std::vector<Block> blocks;
  split_recursive(sorted, 0, sorted.size(), lower, upper, min_count, variance_floor, blocks, trace);
  return Partition(std::move(blocks));
}

Eigen::VectorXd membership(double x, const Partition& partition) {
  if (partition.empty()) throw DataError("membership on an empty partition");
  const auto& blocks = partition.blocks();
  Eigen::VectorXd p(static_cast<Eigen::Index>(blocks.size()));
  for (std::size_t a = 0; a < blocks.size(); ++a) {
    const double d = x - blocks[a].mean;
    p[a] = -d * d / (2.0 * blocks[a].variance);
  }
  p = (p.array() - p.maxCoeff()).exp();
  return p / p.sum();
}

void PiecewiseModel::validate() const {
  if (partition.empty()) throw std::invalid_argument("model has no blocks");
  if (static_cast<std::size_t>(coeffs.size()) != coefficient_count())
    throw DimensionMismatch("model coefficient count does not match its partition");
}

namespace {

double combine(const PiecewiseModel& model, const Eigen::VectorXd& p, double x) {
  const Eigen::Index m = p.size();
  if (model.mode == ModelMode::constant) return p.dot(model.coeffs);
  return p.dot(model.coeffs.head(m)) + x * p.dot(model.coeffs.tail(m));
}

void require_pairs(std::span<const double> series) {
  if (series.size() < 2) throw DataError("series needs at least two samples");
}

// Sparse (N-1) x K design matrix: E = |y - Phi c|^2. Membership weights below
// 1e-18 are dropped; they cannot move a double-precision sum of order one.
Eigen::SparseMatrix<double> design_matrix(std::span<const double> series, const Partition& partition,
                                          ModelMode mode) {
  const Eigen::Index rows = static_cast<Eigen::Index>(series.size()) - 1;
  const Eigen::Index m = static_cast<Eigen::Index>(partition.size());
  const Eigen::Index cols = mode == ModelMode::constant ? m : 2 * m;
  std::vector<Eigen::Triplet<double>> entries;
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double x = series[i];
    const Eigen::VectorXd p = membership(x, partition);
    for (Eigen::Index a = 0; a < m; ++a) {
      if (p[a] < 1e-18) continue;
      entries.emplace_back(i, a, p[a]);
      if (mode == ModelMode::linear) entries.emplace_back(i, m + a, p[a] * x);
    }
  }
  Eigen::SparseMatrix<double> phi(rows, cols);
  phi.setFromTriplets(entries.begin(), entries.end());
  return phi;
}

Eigen::VectorXd targets(std::span<const double> series) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(series.size()) - 1);
  for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = series[i + 1];
  return y;
}

}  // namespace

double eval_model(const PiecewiseModel& model, double x) { return combine(model, membership(x, model.partition), x); }

double training_error(const PiecewiseModel& model, std::span<const double> series) {
  require_pairs(series);
  model.validate();
  double e = 0.0;
  for (std::size_t i = 0; i + 1 < series.size(); ++i) {
    const double r = series[i + 1] - eval_model(model, series[i]);
    e += r * r;
  }
  return e;
}

Eigen::VectorXd error_gradient(const PiecewiseModel& model, std::span<const double> series) {
  require_pairs(series);
  model.validate();
  const Eigen::Index m = static_cast<Eigen::Index>(model.partition.size());
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.coefficient_count()));
  for (std::size_t i = 0; i + 1 < series.size(); ++i) {
    const double x = series[i];
    const Eigen::VectorXd p = membership(x, model.partition);
    const double r = series[i + 1] - combine(model, p, x);
    grad.head(m) -= 2.0 * r * p;
    if (model.mode == ModelMode::linear) grad.tail(m) -= 2.0 * r * x * p;
  }
  return grad;
}

PiecewiseModel initial_model(std::span<const double> series, const Partition& partition, ModelMode mode) {
  require_pairs(series);
  const std::size_t m = partition.size();
  std::vector<double> n(m, 0.0), sx(m, 0.0), sy(m, 0.0), sxx(m, 0.0), sxy(m, 0.0);
  for (std::size_t i = 0; i + 1 < series.size(); ++i) {
    const std::size_t a = partition.locate(series[i]);
    const double x = series[i];
    const double y = series[i + 1];
    n[a] += 1.0;
    sx[a] += x;
    sy[a] += y;
    sxx[a] += x * x;
    sxy[a] += x * y;
  }
  PiecewiseModel model{partition, mode, Eigen::VectorXd::Zero(mode == ModelMode::constant ? m : 2 * m)};
  for (std::size_t a = 0; a < m; ++a) {
    if (n[a] == 0.0) {
      model.coeffs[a] = 0.5;
      continue;
    }
    const double mx = sx[a] / n[a];
    const double my = sy[a] / n[a];
    if (mode == ModelMode::constant) {
      model.coeffs[a] = my;
      continue;
    }
    const double vx = sxx[a] / n[a] - mx * mx;
    const double slope = vx > 1e-14 ? (sxy[a] / n[a] - mx * my) / vx : 0.0;
    model.coeffs[a] = my - slope * mx;
    model.coeffs[m + a] = slope;
  }
  return model;
}

double stable_step(std::span<const double> series, const Partition& partition, ModelMode mode) {
  require_pairs(series);
  const Eigen::SparseMatrix<double> phi = design_matrix(series, partition, mode);
  const Eigen::SparseMatrix<double, Eigen::RowMajor> rows = phi;
  double col_max = 0.0, row_max = 0.0;
  for (Eigen::Index k = 0; k < phi.outerSize(); ++k) {
    double s = 0.0;
    for (Eigen::SparseMatrix<double>::InnerIterator it(phi, k); it; ++it) s += std::abs(it.value());
    col_max = std::max(col_max, s);
  }
  for (Eigen::Index k = 0; k < rows.outerSize(); ++k) {
    double s = 0.0;
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(rows, k); it; ++it) s += std::abs(it.value());
    row_max = std::max(row_max, s);
  }
  return 1.0 / (col_max * row_max);
}

namespace {

void check_finite(double e, int k) {
  if (!std::isfinite(e)) throw DivergenceError("training error became non-finite at iteration " + std::to_string(k));
}

void fit_gradient(const Eigen::SparseMatrix<double>& phi, const Eigen::VectorXd& y, const TrainConfig& cfg,
                  Eigen::VectorXd& c, Eigen::VectorXd& best, std::vector<double>& trace) {
  double best_e = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= cfg.max_iters; ++k) {
    const Eigen::VectorXd r = y - phi * c;
    const double e = r.squaredNorm();
    check_finite(e, k);
    trace.push_back(e);
    if (e < best_e) {
      best_e = e;
      best = c;
    }
    if (k == cfg.max_iters) break;
    const Eigen::VectorXd grad = -2.0 * (phi.transpose() * r);
    c -= cfg.eta(k) * grad;
  }
}

void fit_monte_carlo(const Eigen::SparseMatrix<double>& phi, const Eigen::VectorXd& y, const TrainConfig& cfg,
                     Eigen::VectorXd& c, Eigen::VectorXd& best, std::vector<double>& trace) {
  Rng rng(cfg.seed);
  const Eigen::Index k_count = c.size();
  Eigen::VectorXd col_sq(k_count);
  for (Eigen::Index j = 0; j < k_count; ++j) col_sq[j] = phi.col(j).squaredNorm();
  Eigen::VectorXd r = y - phi * c;
  double e = r.squaredNorm();
  double best_e = e;
  best = c;
  trace.push_back(e);
  for (int sweep = 0; sweep < cfg.max_iters; ++sweep) {
    const double beta = cfg.beta(sweep);
    for (Eigen::Index step = 0; step < k_count; ++step) {
      const Eigen::Index j = static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::size_t>(k_count)));
      const double delta_c = gaussian(rng, cfg.proposal_scale);
      double dot = 0.0;
      for (Eigen::SparseMatrix<double>::InnerIterator it(phi, j); it; ++it) dot += r[it.row()] * it.value();
      const double delta_e = -2.0 * delta_c * dot + delta_c * delta_c * col_sq[j];
      if (uniform01(rng) >= glauber_acceptance(delta_e, beta)) continue;
      c[j] += delta_c;
      for (Eigen::SparseMatrix<double>::InnerIterator it(phi, j); it; ++it) r[it.row()] -= delta_c * it.value();
      e += delta_e;
      if (e < best_e) {
        best_e = e;
        best = c;
      }
    }
    e = r.squaredNorm();
    check_finite(e, sweep);
    trace.push_back(e);
  }
}

}  // namespace

FitResult fit(std::span<const double> series, const Partition& partition, ModelMode mode, const TrainConfig& cfg) {
  cfg.validate();
  require_pairs(series);
  PiecewiseModel start = initial_model(series, partition, mode);
  const Eigen::SparseMatrix<double> phi = design_matrix(series, partition, mode);
  const Eigen::VectorXd y = targets(series);

  FitResult result;
  result.initial_error = training_error(start, series);
  Eigen::VectorXd c = start.coeffs;
  Eigen::VectorXd best = c;
  if (cfg.method == TrainMethod::gradient)
    fit_gradient(phi, y, cfg, c, best, result.error_trace);
  else
    fit_monte_carlo(phi, y, cfg, c, best, result.error_trace);

  PiecewiseModel fitted{partition, mode, best};
  const double fitted_error = training_error(fitted, series);
  if (fitted_error <= result.initial_error) {
    result.model = std::move(fitted);
    result.final_error = fitted_error;
  } else {
    result.model = std::move(start);
    result.final_error = result.initial_error;
  }
  return result;
}

}  // namespace fnc::series
