#pragma once

// Affine iterated function systems on binary rasters: contraction checks,
// attractor rendering, image metrics and the annealed inverse search.

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "fnc/anneal.hpp"
#include "fnc/binary_image.hpp"

namespace fnc::ifs {

/// w(x, y) = (a x + b y + c, d x + e y + f).
template <typename Scalar>
struct AffineMap {
  Scalar a = 0, b = 0, c = 0, d = 0, e = 0, f = 0;

  Eigen::Matrix<Scalar, 2, 2> linear() const {
    Eigen::Matrix<Scalar, 2, 2> m;
    m << a, b, d, e;
    return m;
  }
  Eigen::Matrix<Scalar, 2, 1> translation() const { return {c, f}; }

  std::array<Scalar, 6> coefficients() const { return {a, b, c, d, e, f}; }
  static AffineMap from_coefficients(std::span<const Scalar, 6> k) { return {k[0], k[1], k[2], k[3], k[4], k[5]}; }

  bool finite() const {
    for (Scalar v : coefficients())
      if (!std::isfinite(v)) return false;
    return true;
  }

  bool operator==(const AffineMap&) const = default;
};

using Map = AffineMap<double>;
using Point = Eigen::Vector2d;

template <typename Scalar>
Eigen::Matrix<Scalar, 2, 1> apply_map(const AffineMap<Scalar>& m, const Eigen::Matrix<Scalar, 2, 1>& p) {
  return {m.a * p.x() + m.b * p.y() + m.c, m.d * p.x() + m.e * p.y() + m.f};
}

/// Largest singular value of the linear part, in closed form: isometries
/// come out exactly 1.
template <typename Scalar>
Scalar contraction_factor(const AffineMap<Scalar>& m) {
  using std::hypot;
  return (hypot(m.a + m.e, m.d - m.b) + hypot(m.a - m.e, m.d + m.b)) / Scalar(2);
}

struct IfsSystem {
  std::vector<Map> maps;
  double s = 0.0;

  std::size_t size() const { return maps.size(); }
};

/// Throws NotContractive when some map has factor >= 1, DataError when
/// `maps` is empty or holds a non-finite coefficient.
IfsSystem validate_ifs(std::vector<Map> maps);

/// Half-scale three-map system with fixed points at (0,0), (1,0), (0,1).
IfsSystem sierpinski();

/// Plane rectangle mapped onto a raster. Column x covers
/// [xmin + x w / W, xmin + (x+1) w / W); rows likewise from ymin.
struct Viewport {
  double xmin = 0.0, ymin = 0.0, xmax = 1.0, ymax = 1.0;

  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }
  double diagonal() const;
  void validate() const;

  /// Pixel holding p, or nullopt when p lies outside. Points on the far
  /// edge belong to the last column or row.
  std::optional<std::pair<int, int>> pixel(const Point& p, int width, int height) const;
  Point pixel_center(int x, int y, int width, int height) const;
};

/// Random iteration p <- w_i(p), i uniform; pixels hit after `burn_in`
/// steps are set. Requires iterations > burn_in >= 0.
BinaryImage chaos_game(const IfsSystem& ifs, long iterations, long burn_in, const Viewport& view, int width,
                       int height, std::uint64_t seed);

/// One application of the union operator W(A) = w_1(A) u ... u w_k(A),
/// mapping every set pixel center.
BinaryImage hutchinson_step(const IfsSystem& ifs, const BinaryImage& set, const Viewport& view);

BinaryImage deterministic_attractor(const IfsSystem& ifs, const BinaryImage& start, const Viewport& view,
                                    int iterations);

/// Iterates from the full raster until two successive images agree or
/// `max_iterations` is reached.
BinaryImage render_attractor(const IfsSystem& ifs, const Viewport& view, int width, int height,
                             int max_iterations = 64);

/// Fraction of differing pixels.
double hamming_distance(const BinaryImage& a, const BinaryImage& b);

/// Symmetric Hausdorff distance of two nonempty finite sets.
double hausdorff_distance(std::span<const Point> a, std::span<const Point> b);

/// Centers of the set pixels, row-major order.
std::vector<Point> set_points(const BinaryImage& img, const Viewport& view);

/// eps / (1 - s); requires 0 < s < 1 and eps >= 0.
double collage_bound(double eps, double s);

inline double acceptance_probability(double delta, double beta) { return glauber_acceptance(delta, beta); }

enum class Metric { hamming, hausdorff };

/// d(W(L), L). Under Hausdorff an empty W(L) scores the viewport diagonal.
double collage_distance(const IfsSystem& ifs, const BinaryImage& target, const Viewport& view,
                        Metric metric = Metric::hamming);

struct AnnealSchedule {
  double beta0 = 2000.0;
  double growth = 1.001;
  long sweeps = 1000;
  double step = 1.0 / 64.0;  // fraction of each coefficient's range
  std::uint64_t seed = 0;

  double beta(long sweep) const;
  /// Grid levels per coefficient range, round(1 / step).
  int levels() const;
  void validate() const;
};

struct SearchResult {
  IfsSystem system;
  double initial_delta = 0.0;
  double best_delta = 0.0;
  std::vector<double> proposal_deltas;  // candidate minus current, one per proposal
  std::vector<double> current_trace;    // per sweep
  std::vector<double> best_trace;       // per sweep
  long accepted = 0;
  long proposals = 0;
};

/// Glauber walk over a coefficient grid. Linear coefficients range over
/// [-1, 1] and translations over the viewport; each proposal moves one
/// uniformly chosen coefficient one grid step. Non-contractive or
/// out-of-range proposals count as rejected. A sweep is 6k proposals.
/// `init` is snapped to the grid; without it the start is a random
/// contractive grid point.
SearchResult inverse_search(const BinaryImage& target, int k, const AnnealSchedule& schedule, const Viewport& view,
                            const std::optional<std::vector<Map>>& init = std::nullopt,
                            Metric metric = Metric::hamming);

/// Independent chains seeded schedule.seed + i; returns the chain with the
/// smallest best_delta, lowest index on ties.
SearchResult inverse_search_chains(const BinaryImage& target, int k, const AnnealSchedule& schedule,
                                   const Viewport& view, int chains, int threads,
                                   const std::optional<std::vector<Map>>& init = std::nullopt,
                                   Metric metric = Metric::hamming);

}  // namespace fnc::ifs
