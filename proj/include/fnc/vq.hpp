#pragma once

// Vector quantization with winner-take-all (Kohonen) learning. A codebook is
// a d x m matrix whose columns are the codewords; data sets are d x N.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#include <Eigen/Core>

#include "fnc/error.hpp"
#include "fnc/random.hpp"

namespace fnc::vq {

template <typename Scalar>
using Codebook = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Data = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

namespace detail {

template <typename Scalar, typename Derived>
void check_query(const Codebook<Scalar>& w, const Eigen::MatrixBase<Derived>& v) {
  if (w.cols() < 1) throw DataError("codebook is empty");
  if (v.rows() != w.rows()) throw DimensionMismatch("vector dimension does not match the codebook");
}

}  // namespace detail

/// argmin_i |v - w_i|^2 with exact ties broken uniformly at random. The RNG
/// is consumed only when a tie occurs.
template <typename Scalar, typename Derived>
Eigen::Index winner(const Codebook<Scalar>& w, const Eigen::MatrixBase<Derived>& v, Rng& rng) {
  detail::check_query(w, v);
  Scalar best = std::numeric_limits<Scalar>::infinity();
  Eigen::Index first = 0, ties = 0;
  std::vector<Eigen::Index> tied;
  for (Eigen::Index i = 0; i < w.cols(); ++i) {
    const Scalar d = (v - w.col(i)).squaredNorm();
    if (d < best) {
      best = d;
      first = i;
      ties = 1;
      tied.clear();
    } else if (d == best) {
      if (ties == 1) tied.push_back(first);
      tied.push_back(i);
      ++ties;
    }
  }
  if (ties <= 1) return first;
  return tied[uniform_index(rng, tied.size())];
}

/// Gaussian neighborhood weight on the codeword chain; radius 0 is winner-only.
template <typename Scalar>
Scalar neighborhood(Eigen::Index i, Eigen::Index win, Scalar radius) {
  if (i == win) return Scalar(1);
  if (!(radius > Scalar(0))) return Scalar(0);
  const Scalar k = static_cast<Scalar>(i - win);
  return std::exp(-k * k / (Scalar(2) * radius * radius));
}

/// w_win += eta (v - w_win); with radius > 0 every codeword moves by its
/// neighborhood weight. Returns the winner.
template <typename Scalar, typename Derived>
Eigen::Index online_update(Codebook<Scalar>& w, const Eigen::MatrixBase<Derived>& v, Scalar eta, Rng& rng,
                           Scalar radius = Scalar(0)) {
  if (!(eta > Scalar(0) && eta <= Scalar(1))) throw std::invalid_argument("eta must lie in (0, 1]");
  const Eigen::Index win = winner(w, v, rng);
  if (!(radius > Scalar(0))) {
    w.col(win) += eta * (v - w.col(win));
    return win;
  }
  for (Eigen::Index i = 0; i < w.cols(); ++i) {
    const Scalar h = neighborhood(i, win, radius);
    if (h > Scalar(0)) w.col(i) += (eta * h) * (v - w.col(i));
  }
  return win;
}

/// Cell of each datum and the data indices of each cell.
struct VoronoiCells {
  std::vector<Eigen::Index> owner;
  std::vector<std::vector<Eigen::Index>> cells;
};

template <typename Scalar>
VoronoiCells voronoi_assign(const Codebook<Scalar>& w, const Data<Scalar>& data, Rng& rng) {
  if (data.cols() == 0) throw DataError("no data to assign");
  VoronoiCells v;
  v.owner.resize(static_cast<std::size_t>(data.cols()));
  v.cells.resize(static_cast<std::size_t>(w.cols()));
  for (Eigen::Index n = 0; n < data.cols(); ++n) {
    const Eigen::Index i = winner(w, data.col(n), rng);
    v.owner[static_cast<std::size_t>(n)] = i;
    v.cells[static_cast<std::size_t>(i)].push_back(n);
  }
  return v;
}

/// Sum over data of the squared distance to the nearest codeword.
template <typename Scalar>
Scalar distortion(const Codebook<Scalar>& w, const Data<Scalar>& data) {
  if (data.cols() == 0) throw DataError("no data");
  Scalar total = Scalar(0);
  for (Eigen::Index n = 0; n < data.cols(); ++n) {
    detail::check_query(w, data.col(n));
    total += (w.colwise() - data.col(n)).colwise().squaredNorm().minCoeff();
  }
  return total;
}

/// Each codeword moves by eta times the mean of (v - w_i) over its cell;
/// codewords with empty cells stay put.
template <typename Scalar>
Codebook<Scalar> batch_step(const Codebook<Scalar>& w, const Data<Scalar>& data, Scalar eta, Rng& rng) {
  if (!(eta > Scalar(0))) throw std::invalid_argument("eta must be positive");
  const VoronoiCells cells = voronoi_assign(w, data, rng);
  Codebook<Scalar> next = w;
  for (std::size_t i = 0; i < cells.cells.size(); ++i) {
    const auto& members = cells.cells[i];
    if (members.empty()) continue;
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> mean = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(w.rows());
    for (Eigen::Index n : members) mean += data.col(n);
    mean /= static_cast<Scalar>(members.size());
    const auto col = static_cast<Eigen::Index>(i);
    next.col(col) += eta * (mean - w.col(col));
  }
  return next;
}

struct LearningSchedule {
  double eta0 = 0.5;
  double tau = 0.0;  // 0 selects max_steps / 10
  long max_steps = 10000;
  std::uint64_t seed = 0;
  double radius0 = 0.0;  // neighborhood radius at step 0; 0 is winner-only
  double radius_tau = 0.0;

  double decay() const { return tau > 0.0 ? tau : std::max(1.0, max_steps / 10.0); }
  double eta(long n) const { return std::min(1.0, eta0 / (1.0 + n / decay())); }
  double radius(long n) const {
    if (radius0 <= 0.0) return 0.0;
    return radius0 / (1.0 + n / (radius_tau > 0.0 ? radius_tau : decay()));
  }
  void validate() const {
    if (!(eta0 > 0.0)) throw std::invalid_argument("eta0 must be positive");
    if (max_steps < 0) throw std::invalid_argument("max_steps must be non-negative");
    if (tau < 0.0 || radius0 < 0.0 || radius_tau < 0.0) throw std::invalid_argument("schedule constants must be non-negative");
  }
};

/// m distinct data columns chosen uniformly without replacement.
template <typename Scalar>
Codebook<Scalar> initial_codebook(const Data<Scalar>& data, Eigen::Index m, Rng& rng) {
  if (m < 1) throw std::invalid_argument("m must be at least 1");
  if (data.cols() < m) throw DataError("fewer data vectors than codewords");
  std::vector<Eigen::Index> order(static_cast<std::size_t>(data.cols()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  Codebook<Scalar> w(data.rows(), m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const std::size_t j = static_cast<std::size_t>(i) + uniform_index(rng, order.size() - static_cast<std::size_t>(i));
    std::swap(order[static_cast<std::size_t>(i)], order[j]);
    w.col(i) = data.col(order[static_cast<std::size_t>(i)]);
  }
  return w;
}

template <typename Scalar>
struct TrainResult {
  Codebook<Scalar> codebook;
  Scalar distortion = Scalar(0);
  std::uint64_t seed = 0;
};

/// Online winner-take-all training: at step n a datum drawn uniformly at
/// random updates the codebook with eta(n) and radius(n).
template <typename Scalar>
TrainResult<Scalar> train(const Data<Scalar>& data, Eigen::Index m, const LearningSchedule& schedule) {
  schedule.validate();
  if (data.cols() == 0) throw DataError("no training data");
  if (!data.allFinite()) throw DataError("non-finite training data");
  Rng rng(schedule.seed);
  TrainResult<Scalar> r;
  r.seed = schedule.seed;
  r.codebook = initial_codebook(data, m, rng);
  const auto n_data = static_cast<std::size_t>(data.cols());
  for (long n = 0; n < schedule.max_steps; ++n) {
    const auto k = static_cast<Eigen::Index>(uniform_index(rng, n_data));
    online_update(r.codebook, data.col(k), static_cast<Scalar>(schedule.eta(n)), rng,
                  static_cast<Scalar>(schedule.radius(n)));
  }
  r.distortion = distortion(r.codebook, data);
  return r;
}

/// Independent runs with seeds seed + i; keeps the smallest distortion,
/// lowest index on ties.
template <typename Scalar>
TrainResult<Scalar> train_restarts(const Data<Scalar>& data, Eigen::Index m, const LearningSchedule& schedule,
                                   int restarts, int threads = 1) {
  if (restarts < 1) throw std::invalid_argument("restarts must be at least 1");
  std::vector<TrainResult<Scalar>> runs(static_cast<std::size_t>(restarts));
  std::vector<std::exception_ptr> errors(runs.size());
  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t i = first; i < runs.size(); i += stride) {
      try {
        LearningSchedule s = schedule;
        s.seed = schedule.seed + i;
        runs[i] = train(data, m, s);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), 1, runs.size());
  if (workers == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(work, t, workers);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::size_t best = 0;
  for (std::size_t i = 1; i < runs.size(); ++i)
    if (runs[i].distortion < runs[best].distortion) best = i;
  return std::move(runs[best]);
}

/// Bits per stored index: max(1, ceil(log2 m)).
inline int index_bits(std::size_t m) {
  int bits = 1;
  while ((std::size_t{1} << bits) < m) ++bits;
  return bits;
}

template <typename Scalar>
struct Quantized {
  std::vector<std::uint32_t> indices;
  Data<Scalar> reconstruction;  // winning codewords, binarized at > 0.5
};

template <typename Scalar>
Quantized<Scalar> quantize(const Data<Scalar>& blocks, const Codebook<Scalar>& w, Rng& rng) {
  if (blocks.rows() != w.rows()) throw DimensionMismatch("block length does not match the codebook");
  Quantized<Scalar> q;
  q.indices.reserve(static_cast<std::size_t>(blocks.cols()));
  q.reconstruction.resize(blocks.rows(), blocks.cols());
  for (Eigen::Index n = 0; n < blocks.cols(); ++n) {
    const Eigen::Index i = winner(w, blocks.col(n), rng);
    q.indices.push_back(static_cast<std::uint32_t>(i));
    q.reconstruction.col(n) = (w.col(i).array() > Scalar(0.5)).template cast<Scalar>().matrix();
  }
  return q;
}

/// Indices packed least-significant bit first, `bits` per index.
inline std::vector<std::uint8_t> pack_indices(std::span<const std::uint32_t> indices, int bits) {
  std::vector<std::uint8_t> out((indices.size() * static_cast<std::size_t>(bits) + 7) / 8, 0);
  std::size_t at = 0;
  for (std::uint32_t v : indices)
    for (int b = 0; b < bits; ++b, ++at)
      if ((v >> b) & 1u) out[at / 8] |= static_cast<std::uint8_t>(1u << (at % 8));
  return out;
}

inline std::vector<std::uint32_t> unpack_indices(std::span<const std::uint8_t> packed, std::size_t count, int bits) {
  if (packed.size() * 8 < count * static_cast<std::size_t>(bits)) throw FormatError("packed index stream is truncated");
  std::vector<std::uint32_t> out(count, 0);
  std::size_t at = 0;
  for (auto& v : out)
    for (int b = 0; b < bits; ++b, ++at)
      if ((packed[at / 8] >> (at % 8)) & 1u) v |= 1u << b;
  return out;
}

}  // namespace fnc::vq
