#pragma once

// Three-layer sigmoid network y = s2(W2 s1(W1 x + b1) + b2). The biases are
// held at zero unless `trainable_bias` is set, which recovers the bias-free
// form z_i = s1(sum_j W1_ij x_j), y_l = s2(sum_i W2_li z_i).

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fnc/anneal.hpp"
#include "fnc/error.hpp"
#include "fnc/random.hpp"
#include "fnc/train_config.hpp"

namespace fnc::net {

template <typename Scalar>
Scalar sigmoid(Scalar x, Scalar lambda) {
  const Scalar t = lambda * x;
  if (t >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-t));
  const Scalar e = std::exp(t);
  return e / (Scalar(1) + e);
}

/// Coefficient-wise sigmoid of an Eigen expression.
template <typename Derived>
auto sigmoid(const Eigen::MatrixBase<Derived>& x, typename Derived::Scalar lambda) {
  using Scalar = typename Derived::Scalar;
  return x.unaryExpr([lambda](Scalar v) { return sigmoid<Scalar>(v, lambda); }).eval();
}

template <typename Scalar>
struct LayerWeights {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Matrix w1;  // hidden x input
  Matrix w2;  // output x hidden
  Vector b1;  // hidden
  Vector b2;  // output
  Scalar lambda1 = Scalar(1);
  Scalar lambda2 = Scalar(1);
  bool trainable_bias = false;

  static LayerWeights zeros(Eigen::Index in, Eigen::Index hidden, Eigen::Index out) {
    return LayerWeights{Matrix::Zero(hidden, in), Matrix::Zero(out, hidden), Vector::Zero(hidden),
                        Vector::Zero(out)};
  }

  /// Entries uniform in [-scale, scale]; biases also randomized when trainable.
  static LayerWeights random(Eigen::Index in, Eigen::Index hidden, Eigen::Index out, Rng& rng,
                             bool with_bias = false, Scalar scale = Scalar(0.5)) {
    auto w = zeros(in, hidden, out);
    w.trainable_bias = with_bias;
    std::uniform_real_distribution<Scalar> u(-scale, scale);
    auto fill = [&](auto& m) {
      for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
    };
    fill(w.w1);
    fill(w.w2);
    if (with_bias) {
      fill(w.b1);
      fill(w.b2);
    }
    return w;
  }

  Eigen::Index input_dim() const { return w1.cols(); }
  Eigen::Index hidden_dim() const { return w1.rows(); }
  Eigen::Index output_dim() const { return w2.rows(); }

  Eigen::Index parameter_count() const {
    return w1.size() + w2.size() + (trainable_bias ? b1.size() + b2.size() : 0);
  }

  /// Trainable parameters: w1 and w2 row-major, then b1, b2 when trainable.
  Vector flatten() const {
    Vector p(parameter_count());
    Eigen::Index at = 0;
    auto put = [&](const auto& m) {
      for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) p[at++] = m(r, c);
    };
    put(w1);
    put(w2);
    if (trainable_bias) {
      put(b1);
      put(b2);
    }
    return p;
  }

  void assign(const Vector& p) {
    if (p.size() != parameter_count()) throw DimensionMismatch("parameter vector has wrong length");
    Eigen::Index at = 0;
    auto get = [&](auto& m) {
      for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = p[at++];
    };
    get(w1);
    get(w2);
    if (trainable_bias) {
      get(b1);
      get(b2);
    }
  }

  void validate() const {
    if (w2.cols() != w1.rows() || b1.size() != w1.rows() || b2.size() != w2.rows())
      throw DimensionMismatch("inconsistent layer dimensions");
    if (!w1.allFinite() || !w2.allFinite() || !b1.allFinite() || !b2.allFinite())
      throw DataError("non-finite network weight");
    if (!(lambda1 > Scalar(0)) || !(lambda2 > Scalar(0))) throw std::invalid_argument("lambda must be positive");
  }
};

template <typename Scalar>
struct Activations {
  typename LayerWeights<Scalar>::Vector z;
  typename LayerWeights<Scalar>::Vector y;
};

template <typename Scalar>
struct BatchActivations {
  typename LayerWeights<Scalar>::Matrix z;  // hidden x batch
  typename LayerWeights<Scalar>::Matrix y;  // output x batch
};

template <typename Scalar, typename Derived>
Activations<Scalar> forward(const LayerWeights<Scalar>& w, const Eigen::MatrixBase<Derived>& x) {
  if (x.size() != w.input_dim()) throw DimensionMismatch("input length does not match the network");
  Activations<Scalar> a;
  a.z = sigmoid((w.w1 * x + w.b1).eval(), w.lambda1);
  a.y = sigmoid((w.w2 * a.z + w.b2).eval(), w.lambda2);
  return a;
}

/// Columns of `x` are independent inputs.
template <typename Scalar, typename Derived>
BatchActivations<Scalar> forward_batch(const LayerWeights<Scalar>& w, const Eigen::MatrixBase<Derived>& x) {
  if (x.rows() != w.input_dim()) throw DimensionMismatch("input rows do not match the network");
  BatchActivations<Scalar> a;
  a.z = sigmoid((( w.w1 * x).colwise() + w.b1).eval(), w.lambda1);
  a.y = sigmoid(((w.w2 * a.z).colwise() + w.b2).eval(), w.lambda2);
  return a;
}

/// E = sum over columns k of |targets_k - y(inputs_k)|^2.
template <typename Scalar, typename D1, typename D2>
Scalar pair_cost(const LayerWeights<Scalar>& w, const Eigen::MatrixBase<D1>& inputs,
                 const Eigen::MatrixBase<D2>& targets) {
  if (inputs.cols() != targets.cols() || targets.rows() != w.output_dim())
    throw DimensionMismatch("targets do not match inputs or network output");
  return (targets - forward_batch(w, inputs).y).squaredNorm();
}

/// Successor-prediction cost over a vectorized series (one vector per column).
template <typename Scalar, typename Derived>
Scalar series_cost(const LayerWeights<Scalar>& w, const Eigen::MatrixBase<Derived>& vectors) {
  if (vectors.cols() < 2) throw DataError("series needs at least two vectors");
  const Eigen::Index k = vectors.cols() - 1;
  return pair_cost(w, vectors.leftCols(k), vectors.rightCols(k));
}

template <typename Scalar>
struct CostGradient {
  Scalar cost = Scalar(0);
  LayerWeights<Scalar> grad;  // same shapes as the weights
};

/// Backpropagated gradient of pair_cost.
template <typename Scalar, typename D1, typename D2>
CostGradient<Scalar> cost_gradient(const LayerWeights<Scalar>& w, const Eigen::MatrixBase<D1>& inputs,
                                   const Eigen::MatrixBase<D2>& targets) {
  using Matrix = typename LayerWeights<Scalar>::Matrix;
  const auto a = forward_batch(w, inputs);
  const Matrix residual = a.y - targets;
  CostGradient<Scalar> out;
  out.cost = residual.squaredNorm();
  const Matrix g2 = (Scalar(2) * w.lambda2) * residual.cwiseProduct(a.y.cwiseProduct((Scalar(1) - a.y.array()).matrix()));
  const Matrix g1 =
      w.lambda1 * (w.w2.transpose() * g2).cwiseProduct(a.z.cwiseProduct((Scalar(1) - a.z.array()).matrix()));
  out.grad = w;
  out.grad.w2 = g2 * a.z.transpose();
  out.grad.w1 = g1 * inputs.transpose();
  out.grad.b2 = g2.rowwise().sum();
  out.grad.b1 = g1.rowwise().sum();
  return out;
}

template <typename Scalar>
struct TrainResult {
  LayerWeights<Scalar> weights;
  Scalar initial_cost = Scalar(0);
  Scalar final_cost = Scalar(0);
  std::vector<Scalar> cost_trace;  // gradient: cost per iteration; annealing: best-so-far per sweep
};

namespace detail {

template <typename Scalar>
void check_finite(Scalar cost, int k) {
  if (!std::isfinite(cost)) throw DivergenceError("network cost became non-finite at iteration " + std::to_string(k));
}

}  // namespace detail

/// Minimizes pair_cost from `start`. Gradient mode takes full-batch steps of
/// size eta(k); Monte Carlo mode runs a Glauber walk with Gaussian single
/// parameter proposals and inverse temperature beta(sweep). The best weights
/// seen are returned, so final_cost <= initial_cost.
template <typename Scalar, typename D1, typename D2>
TrainResult<Scalar> train(const LayerWeights<Scalar>& start, const Eigen::MatrixBase<D1>& inputs,
                          const Eigen::MatrixBase<D2>& targets, const TrainConfig& cfg) {
  cfg.validate();
  start.validate();
  if (!inputs.allFinite() || !targets.allFinite()) throw DataError("non-finite training data");
  TrainResult<Scalar> result;
  LayerWeights<Scalar> w = start;
  LayerWeights<Scalar> best = start;
  result.initial_cost = pair_cost(start, inputs, targets);
  Scalar best_cost = result.initial_cost;

  if (cfg.method == TrainMethod::gradient) {
    for (int k = 0; k < cfg.max_iters; ++k) {
      const auto g = cost_gradient(w, inputs, targets);
      detail::check_finite(g.cost, k);
      result.cost_trace.push_back(g.cost);
      if (g.cost < best_cost) {
        best_cost = g.cost;
        best = w;
      }
      const Scalar eta = static_cast<Scalar>(cfg.eta(k));
      w.w1 -= eta * g.grad.w1;
      w.w2 -= eta * g.grad.w2;
      if (w.trainable_bias) {
        w.b1 -= eta * g.grad.b1;
        w.b2 -= eta * g.grad.b2;
      }
    }
    const Scalar last = pair_cost(w, inputs, targets);
    detail::check_finite(last, cfg.max_iters);
    result.cost_trace.push_back(last);
    if (last < best_cost) {
      best_cost = last;
      best = w;
    }
  } else {
    Rng rng(cfg.seed);
    auto params = w.flatten();
    Scalar cost = result.initial_cost;
    const Eigen::Index n = params.size();
    for (int sweep = 0; sweep < cfg.max_iters; ++sweep) {
      const double beta = cfg.beta(sweep);
      for (Eigen::Index step = 0; step < n; ++step) {
        const Eigen::Index j = static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::size_t>(n)));
        const Scalar old = params[j];
        params[j] += static_cast<Scalar>(gaussian(rng, cfg.proposal_scale));
        w.assign(params);
        const Scalar trial = pair_cost(w, inputs, targets);
        detail::check_finite(trial, sweep);
        if (uniform01(rng) < glauber_acceptance(static_cast<double>(trial - cost), beta)) {
          cost = trial;
          if (cost < best_cost) {
            best_cost = cost;
            best = w;
          }
        } else {
          params[j] = old;
        }
      }
      w.assign(params);
      result.cost_trace.push_back(best_cost);
    }
  }
  result.weights = std::move(best);
  result.final_cost = best_cost;
  return result;
}

/// Trains on successive vector pairs (x^k, x^{k+1}) of a vectorized series.
template <typename Scalar, typename Derived>
TrainResult<Scalar> train_series(const LayerWeights<Scalar>& start, const Eigen::MatrixBase<Derived>& vectors,
                                 const TrainConfig& cfg) {
  if (vectors.cols() < 2) throw DataError("series needs at least two vectors");
  const Eigen::Index k = vectors.cols() - 1;
  return train(start, vectors.leftCols(k), vectors.rightCols(k), cfg);
}

}  // namespace fnc::net
