#include "fnc/ifs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "fnc/error.hpp"
#include "fnc/random.hpp"

namespace fnc::ifs {

IfsSystem validate_ifs(std::vector<Map> maps) {
  if (maps.empty()) throw DataError("an IFS needs at least one map");
  double s = 0.0;
  for (std::size_t i = 0; i < maps.size(); ++i) {
    if (!maps[i].finite()) throw DataError("map " + std::to_string(i) + " has a non-finite coefficient");
    const double f = contraction_factor(maps[i]);
    if (!(f < 1.0))
      throw NotContractive("map " + std::to_string(i) + " has contraction factor " + std::to_string(f));
    s = std::max(s, f);
  }
  return IfsSystem{std::move(maps), s};
}

IfsSystem sierpinski() {
  return validate_ifs({Map{0.5, 0, 0, 0, 0.5, 0}, Map{0.5, 0, 0.5, 0, 0.5, 0}, Map{0.5, 0, 0, 0, 0.5, 0.5}});
}

double Viewport::diagonal() const { return std::hypot(width(), height()); }

void Viewport::validate() const {
  if (!std::isfinite(xmin) || !std::isfinite(xmax) || !std::isfinite(ymin) || !std::isfinite(ymax) ||
      !(xmax > xmin) || !(ymax > ymin))
    throw DataError("degenerate viewport");
}

std::optional<std::pair<int, int>> Viewport::pixel(const Point& p, int width, int height) const {
  const double u = (p.x() - xmin) / (xmax - xmin) * width;
  const double v = (p.y() - ymin) / (ymax - ymin) * height;
  if (!(u >= 0.0 && u <= width && v >= 0.0 && v <= height)) return std::nullopt;
  const int px = std::min(static_cast<int>(std::floor(u)), width - 1);
  const int py = std::min(static_cast<int>(std::floor(v)), height - 1);
  return std::pair{px, py};
}

Point Viewport::pixel_center(int x, int y, int width, int height) const {
  return {xmin + (x + 0.5) * (xmax - xmin) / width, ymin + (y + 0.5) * (ymax - ymin) / height};
}

namespace {

void check_raster(int width, int height) {
  if (width < 1 || height < 1) throw DataError("raster dimensions must be positive");
}

}  // namespace

BinaryImage chaos_game(const IfsSystem& ifs, long iterations, long burn_in, const Viewport& view, int width,
                       int height, std::uint64_t seed) {
  if (!(iterations > burn_in && burn_in >= 0)) throw std::invalid_argument("need iterations > burn_in >= 0");
  if (ifs.maps.empty()) throw DataError("empty IFS");
  view.validate();
  check_raster(width, height);
  Rng rng(seed);
  Point p{view.xmin + uniform01(rng) * view.width(), view.ymin + uniform01(rng) * view.height()};
  BinaryImage img(width, height);
  for (long t = 0; t < iterations; ++t) {
    p = apply_map(ifs.maps[uniform_index(rng, ifs.maps.size())], p);
    if (t < burn_in) continue;
    if (auto px = view.pixel(p, width, height)) img.set(px->first, px->second);
  }
  return img;
}

BinaryImage hutchinson_step(const IfsSystem& ifs, const BinaryImage& set, const Viewport& view) {
  view.validate();
  const int w = set.width(), h = set.height();
  BinaryImage out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!set(x, y)) continue;
      const Point c = view.pixel_center(x, y, w, h);
      for (const Map& m : ifs.maps)
        if (auto px = view.pixel(apply_map(m, c), w, h)) out.set(px->first, px->second);
    }
  return out;
}

BinaryImage deterministic_attractor(const IfsSystem& ifs, const BinaryImage& start, const Viewport& view,
                                    int iterations) {
  if (iterations < 1) throw std::invalid_argument("iterations must be at least 1");
  BinaryImage img = start;
  for (int i = 0; i < iterations; ++i) img = hutchinson_step(ifs, img, view);
  return img;
}

BinaryImage render_attractor(const IfsSystem& ifs, const Viewport& view, int width, int height,
                             int max_iterations) {
  check_raster(width, height);
  BinaryImage img(width, height);
  img.pixels().setOnes();
  for (int i = 0; i < max_iterations; ++i) {
    BinaryImage next = hutchinson_step(ifs, img, view);
    if (next == img) break;
    img = std::move(next);
  }
  return img;
}

double hamming_distance(const BinaryImage& a, const BinaryImage& b) {
  if (a.width() != b.width() || a.height() != b.height())
    throw DimensionMismatch("images differ in size: " + std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                            " vs " + std::to_string(b.width()) + "x" + std::to_string(b.height()));
  if (a.empty()) throw DataError("empty image");
  const auto differing = (a.pixels() != b.pixels()).count();
  return static_cast<double>(differing) / static_cast<double>(a.size());
}

namespace {

// max over a in A of min over b in B of |a - b|^2, with B sorted by x.
double directed_squared(std::span<const Point> a, const std::vector<Point>& b) {
  double worst = 0.0;
  for (const Point& p : a) {
    auto right = std::lower_bound(b.begin(), b.end(), p.x(), [](const Point& q, double x) { return q.x() < x; });
    auto left = right;
    double best = std::numeric_limits<double>::infinity();
    bool more_right = right != b.end(), more_left = left != b.begin();
    while ((more_right || more_left) && best > worst) {
      const double dr = more_right ? right->x() - p.x() : std::numeric_limits<double>::infinity();
      const double dl = more_left ? p.x() - std::prev(left)->x() : std::numeric_limits<double>::infinity();
      const bool go_right = dr <= dl;
      const double dx = go_right ? dr : dl;
      if (dx * dx >= best) break;
      const Point& q = go_right ? *right++ : *--left;
      const double ex = q.x() - p.x(), ey = q.y() - p.y();
      best = std::min(best, ex * ex + ey * ey);
      more_right = right != b.end();
      more_left = left != b.begin();
    }
    worst = std::max(worst, best);
  }
  return worst;
}

std::vector<Point> sorted_by_x(std::span<const Point> pts) {
  std::vector<Point> out(pts.begin(), pts.end());
  std::sort(out.begin(), out.end(), [](const Point& p, const Point& q) { return p.x() < q.x(); });
  return out;
}

}  // namespace

double hausdorff_distance(std::span<const Point> a, std::span<const Point> b) {
  if (a.empty() || b.empty()) throw DataError("Hausdorff distance of an empty set");
  return std::sqrt(std::max(directed_squared(a, sorted_by_x(b)), directed_squared(b, sorted_by_x(a))));
}

std::vector<Point> set_points(const BinaryImage& img, const Viewport& view) {
  std::vector<Point> pts;
  pts.reserve(img.count());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      if (img(x, y)) pts.push_back(view.pixel_center(x, y, img.width(), img.height()));
  return pts;
}

double collage_bound(double eps, double s) {
  if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("contraction factor must lie in (0, 1)");
  if (!(eps >= 0.0)) throw std::invalid_argument("eps must be non-negative");
  return eps / (1.0 - s);
}

double collage_distance(const IfsSystem& ifs, const BinaryImage& target, const Viewport& view, Metric metric) {
  const BinaryImage image = hutchinson_step(ifs, target, view);
  if (metric == Metric::hamming) return hamming_distance(image, target);
  const auto l = set_points(target, view);
  if (l.empty()) throw DataError("Hausdorff collage distance of an empty target");
  const auto wl = set_points(image, view);
  if (wl.empty()) return view.diagonal();
  return hausdorff_distance(wl, l);
}

double AnnealSchedule::beta(long sweep) const { return beta0 * std::pow(growth, static_cast<double>(sweep)); }

int AnnealSchedule::levels() const { return std::max(1, static_cast<int>(std::lround(1.0 / step))); }

void AnnealSchedule::validate() const {
  if (!(beta0 > 0.0) || !std::isfinite(beta0)) throw std::invalid_argument("beta0 must be positive");
  if (!(growth >= 1.0) || !std::isfinite(growth)) throw std::invalid_argument("growth must be at least 1");
  if (sweeps < 0) throw std::invalid_argument("sweeps must be non-negative");
  if (!(step > 0.0 && step <= 1.0)) throw std::invalid_argument("step must lie in (0, 1]");
}

namespace {

using Indices = std::array<int, 6>;

// Integer coordinates of the coefficient grid.
struct Grid {
  int levels;
  Viewport view;

  double value(int j, int n) const {
    const double t = static_cast<double>(n) / levels;
    switch (j) {
      case 2: return view.xmin + t * view.width();
      case 5: return view.ymin + t * view.height();
      default: return -1.0 + 2.0 * t;
    }
  }

  int snap(int j, double v) const {
    double t;
    switch (j) {
      case 2: t = (v - view.xmin) / view.width(); break;
      case 5: t = (v - view.ymin) / view.height(); break;
      default: t = (v + 1.0) / 2.0;
    }
    return std::clamp(static_cast<int>(std::lround(t * levels)), 0, levels);
  }

  Map map(const Indices& n) const {
    return {value(0, n[0]), value(1, n[1]), value(2, n[2]), value(3, n[3]), value(4, n[4]), value(5, n[5])};
  }
};

// Hamming collage distance maintained under single-map replacement. Every set
// target pixel is mapped by every map; `cover_` counts hits per pixel.
class HammingCollage {
 public:
  HammingCollage(const BinaryImage& target, const Viewport& view, std::size_t k)
      : view_(view), width_(target.width()), height_(target.height()), hits_(k) {
    const std::size_t n = target.size();
    inside_.resize(n);
    cover_.assign(n, 0);
    for (int y = 0; y < height_; ++y)
      for (int x = 0; x < width_; ++x) {
        const std::size_t at = static_cast<std::size_t>(y) * width_ + x;
        inside_[at] = target(x, y);
        if (inside_[at]) {
          centers_.push_back(view.pixel_center(x, y, width_, height_));
          ++differing_;
        }
      }
    total_ = static_cast<double>(n);
  }

  double distance() const { return static_cast<double>(differing_) / total_; }

  std::vector<std::uint32_t> image_of(const Map& m) const {
    std::vector<std::uint32_t> out;
    out.reserve(centers_.size());
    for (const Point& c : centers_)
      if (auto px = view_.pixel(apply_map(m, c), width_, height_))
        out.push_back(static_cast<std::uint32_t>(px->second) * width_ + px->first);
    return out;
  }

  /// Installs `hits` as the image of map i; returns the previous image.
  std::vector<std::uint32_t> replace(std::size_t i, std::vector<std::uint32_t> hits) {
    for (std::uint32_t p : hits_[i])
      if (--cover_[p] == 0) differing_ += inside_[p] ? 1 : -1;
    for (std::uint32_t p : hits)
      if (cover_[p]++ == 0) differing_ += inside_[p] ? -1 : 1;
    std::swap(hits_[i], hits);
    return hits;
  }

 private:
  Viewport view_;
  int width_, height_;
  std::vector<Point> centers_;
  std::vector<bool> inside_;
  std::vector<std::uint32_t> cover_;
  std::vector<std::vector<std::uint32_t>> hits_;
  long differing_ = 0;
  double total_ = 1.0;
};

bool contractive(const Map& m) { return contraction_factor(m) < 1.0; }

IfsSystem system_of(const Grid& grid, const std::vector<Indices>& state) {
  std::vector<Map> maps;
  for (const auto& n : state) maps.push_back(grid.map(n));
  return validate_ifs(std::move(maps));
}

std::vector<Indices> starting_state(const Grid& grid, int k, const std::optional<std::vector<Map>>& init, Rng& rng) {
  std::vector<Indices> state(static_cast<std::size_t>(k));
  if (init) {
    if (init->size() != state.size()) throw DimensionMismatch("initial system has the wrong number of maps");
    for (std::size_t i = 0; i < state.size(); ++i) {
      const auto coeffs = (*init)[i].coefficients();
      for (int j = 0; j < 6; ++j) state[i][j] = grid.snap(j, coeffs[j]);
      if (!contractive(grid.map(state[i]))) throw NotContractive("initial map is not contractive on the grid");
    }
    return state;
  }
  for (auto& n : state) {
    int attempts = 0;
    do {
      for (int& v : n) v = static_cast<int>(uniform_index(rng, static_cast<std::size_t>(grid.levels) + 1));
    } while (!contractive(grid.map(n)) && ++attempts < 1000);
    if (!contractive(grid.map(n))) n = {grid.levels / 2, grid.levels / 2, 0, grid.levels / 2, grid.levels / 2, 0};
  }
  return state;
}

}  // namespace

SearchResult inverse_search(const BinaryImage& target, int k, const AnnealSchedule& schedule, const Viewport& view,
                            const std::optional<std::vector<Map>>& init, Metric metric) {
  if (k < 1) throw std::invalid_argument("k must be at least 1");
  schedule.validate();
  view.validate();
  if (target.empty() || target.count() == 0) throw DataError("inverse search needs a nonempty target");

  const Grid grid{schedule.levels(), view};
  Rng rng(schedule.seed);
  std::vector<Indices> state = starting_state(grid, k, init, rng);

  HammingCollage collage(target, view, state.size());
  if (metric == Metric::hamming)
    for (std::size_t i = 0; i < state.size(); ++i) collage.replace(i, collage.image_of(grid.map(state[i])));
  auto evaluate = [&](const std::vector<Indices>& s) {
    return metric == Metric::hamming ? collage.distance() : collage_distance(system_of(grid, s), target, view, metric);
  };

  SearchResult result;
  double current = evaluate(state);
  result.initial_delta = current;
  result.best_delta = current;
  std::vector<Indices> best = state;
  const std::size_t coefficients = 6 * state.size();

  for (long sweep = 0; sweep < schedule.sweeps; ++sweep) {
    const double beta = schedule.beta(sweep);
    for (std::size_t step = 0; step < coefficients; ++step) {
      ++result.proposals;
      const std::size_t pick = uniform_index(rng, coefficients);
      const std::size_t i = pick / 6;
      const int j = static_cast<int>(pick % 6);
      const int move = uniform_index(rng, 2) == 0 ? -1 : 1;
      const int next = state[i][j] + move;
      if (next < 0 || next > grid.levels) continue;
      const int old = state[i][j];
      state[i][j] = next;
      const Map candidate = grid.map(state[i]);
      if (!contractive(candidate)) {
        state[i][j] = old;
        continue;
      }
      std::vector<std::uint32_t> previous;
      if (metric == Metric::hamming) previous = collage.replace(i, collage.image_of(candidate));
      const double trial = evaluate(state);
      const double delta = trial - current;
      result.proposal_deltas.push_back(delta);
      if (uniform01(rng) < acceptance_probability(delta, beta)) {
        ++result.accepted;
        current = trial;
        if (current < result.best_delta) {
          result.best_delta = current;
          best = state;
        }
      } else {
        state[i][j] = old;
        if (metric == Metric::hamming) collage.replace(i, std::move(previous));
      }
    }
    result.current_trace.push_back(current);
    result.best_trace.push_back(result.best_delta);
  }
  result.system = system_of(grid, best);
  return result;
}

SearchResult inverse_search_chains(const BinaryImage& target, int k, const AnnealSchedule& schedule,
                                   const Viewport& view, int chains, int threads,
                                   const std::optional<std::vector<Map>>& init, Metric metric) {
  if (chains < 1) throw std::invalid_argument("chains must be at least 1");
  std::vector<std::optional<SearchResult>> results(static_cast<std::size_t>(chains));
  std::vector<std::exception_ptr> errors(results.size());
  auto run = [&](std::size_t first, std::size_t stride) {
    for (std::size_t c = first; c < results.size(); c += stride) {
      try {
        AnnealSchedule s = schedule;
        s.seed = schedule.seed + c;
        results[c] = inverse_search(target, k, s, view, init, metric);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), 1, results.size());
  if (workers == 1) {
    run(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(run, t, workers);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::size_t winner = 0;
  for (std::size_t c = 1; c < results.size(); ++c)
    if (results[c]->best_delta < results[winner]->best_delta) winner = c;
  return std::move(*results[winner]);
}

}  // namespace fnc::ifs
