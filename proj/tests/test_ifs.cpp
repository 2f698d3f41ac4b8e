#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <Eigen/LU>

#include "doctest.h"
#include "fnc/error.hpp"
#include "fnc/ifs.hpp"

using namespace fnc::ifs;
using fnc::BinaryImage;

namespace {

double operator_norm_by_angles(const Map& m, int steps = 200000) {
  double best = 0.0;
  for (int i = 0; i < steps; ++i) {
    const double t = std::numbers::pi * i / steps;
    const double x = std::cos(t), y = std::sin(t);
    best = std::max(best, std::hypot(m.a * x + m.b * y, m.d * x + m.e * y));
  }
  return best;
}

double brute_hausdorff(const std::vector<Point>& a, const std::vector<Point>& b) {
  auto directed = [](const std::vector<Point>& p, const std::vector<Point>& q) {
    double worst = 0.0;
    for (const auto& u : p) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& v : q) {
        const double ex = v.x() - u.x(), ey = v.y() - u.y();
        best = std::min(best, ex * ex + ey * ey);
      }
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::sqrt(std::max(directed(a, b), directed(b, a)));
}

// Pixels (i, j) with i & j == 0: the rasterized half-scale three-corner gasket.
BinaryImage pascal_gasket(int side) {
  BinaryImage img(side, side);
  for (int y = 0; y < side; ++y)
    for (int x = 0; x < side; ++x) img.set(x, y, (x & y) == 0);
  return img;
}

BinaryImage random_image(int w, int h, std::mt19937_64& rng, double density = 0.5) {
  std::bernoulli_distribution on(density);
  BinaryImage img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img.set(x, y, on(rng));
  return img;
}

std::vector<Point> random_points(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<Point> pts(n);
  for (auto& p : pts) p = {u(rng), u(rng)};
  return pts;
}

Map random_map(std::mt19937_64& rng, double spread = 1.0) {
  std::uniform_real_distribution<double> u(-spread, spread);
  return {u(rng), u(rng), u(rng), u(rng), u(rng), u(rng)};
}

}  // namespace

TEST_CASE("apply_map") {
  const Map id{1, 0, 0, 0, 1, 0};
  CHECK(apply_map(id, Point(2, 3)) == Point(2, 3));
  CHECK(apply_map(Map{0.5, 0, 0, 0, 0.5, 0}, Point(2, 4)) == Point(1, 2));
  std::mt19937_64 rng(1);
  for (int t = 0; t < 100; ++t) {
    const Map m = random_map(rng, 3.0);
    const Point p = random_points(1, rng)[0];
    const Point q = apply_map(m, p);
    CHECK(q.x() == m.a * p.x() + m.b * p.y() + m.c);
    CHECK(q.y() == m.d * p.x() + m.e * p.y() + m.f);
  }
}

TEST_CASE("contraction_factor") {
  CHECK(contraction_factor(Map{0.5, 0, 0, 0, 0.5, 0}) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(contraction_factor(Map{0, 1, 0, 1, 0, 0}) == doctest::Approx(1.0).epsilon(1e-15));
  const Map shear{1, 1, 0, 0, 1, 0};
  CHECK(contraction_factor(shear) == doctest::Approx(std::numbers::phi).epsilon(1e-12));
  CHECK(contraction_factor(shear) == doctest::Approx(operator_norm_by_angles(shear)).epsilon(1e-8));

  std::mt19937_64 rng(2);
  for (int t = 0; t < 50; ++t) {
    const Map m = random_map(rng);
    CHECK(contraction_factor(m) == doctest::Approx(operator_norm_by_angles(m)).epsilon(1e-8));
  }
}

TEST_CASE("validate_ifs") {
  CHECK(sierpinski().s == doctest::Approx(0.5));
  CHECK(sierpinski().size() == 3);
  CHECK_THROWS_AS(validate_ifs({Map{0.5, 0, 0, 0, 0.5, 0}, Map{0, 1, 0, 1, 0, 0}}), fnc::NotContractive);
  CHECK(validate_ifs({Map{0.3, 0, 0, 0, 0.3, 0}, Map{0.7, 0, 0, 0, 0.7, 0}}).s == doctest::Approx(0.7));
  CHECK_THROWS_AS(validate_ifs({}), fnc::DataError);
  CHECK_THROWS_AS(validate_ifs({Map{std::nan(""), 0, 0, 0, 0.5, 0}}), fnc::DataError);
}

TEST_CASE("maps contract by at most s on random point pairs") {
  std::mt19937_64 rng(3);
  std::vector<IfsSystem> systems{sierpinski()};
  while (systems.size() < 10) {
    std::vector<Map> maps{random_map(rng, 0.7), random_map(rng, 0.7)};
    try {
      systems.push_back(validate_ifs(maps));
    } catch (const fnc::NotContractive&) {
    }
  }
  long violations = 0;
  for (const auto& sys : systems)
    for (int t = 0; t < 10000; ++t) {
      const auto pts = random_points(2, rng);
      for (const Map& m : sys.maps)
        if ((apply_map(m, pts[0]) - apply_map(m, pts[1])).norm() > sys.s * (pts[0] - pts[1]).norm() + 1e-12)
          ++violations;
    }
  CHECK(violations == 0);
}

TEST_CASE("viewport rasterization") {
  const Viewport v;
  CHECK(v.pixel({0.0, 0.0}, 4, 4) == std::pair{0, 0});
  CHECK(v.pixel({1.0, 1.0}, 4, 4) == std::pair{3, 3});
  CHECK(v.pixel({0.25, 0.5}, 4, 4) == std::pair{1, 2});
  CHECK_FALSE(v.pixel({1.01, 0.5}, 4, 4).has_value());
  CHECK_FALSE(v.pixel({-1e-9, 0.5}, 4, 4).has_value());
  CHECK_FALSE(v.pixel({std::nan(""), 0.5}, 4, 4).has_value());
  CHECK(v.pixel_center(1, 2, 4, 4) == Point(0.375, 0.625));
  CHECK_THROWS_AS((Viewport{0, 0, 0, 1}.validate()), fnc::DataError);
}

TEST_CASE("deterministic attractor of the reference system") {
  const IfsSystem sys = sierpinski();
  const Viewport view;
  BinaryImage img(256, 256);
  img.pixels().setOnes();
  double expected = 65536.0;
  for (int n = 1; n <= 8; ++n) {
    img = hutchinson_step(sys, img, view);
    expected *= 0.75;
    CHECK(static_cast<double>(img.count()) == expected);
  }
  CHECK(img == pascal_gasket(256));
  CHECK(hutchinson_step(sys, img, view) == img);
  CHECK(render_attractor(sys, view, 256, 256) == pascal_gasket(256));
  CHECK(hamming_distance(deterministic_attractor(sys, img, view, 1), img) <= 0.005);
}

TEST_CASE("single half-scale map halves the set diameter") {
  const IfsSystem one = validate_ifs({Map{0.5, 0, 0.25, 0, 0.5, 0.25}});
  const Viewport view;
  BinaryImage img(64, 64);
  img.pixels().setOnes();
  for (int side = 32; side >= 2; side /= 2) {
    img = hutchinson_step(one, img, view);
    CHECK(img.count() == static_cast<std::size_t>(side) * side);
  }
  // Pixel centers straddle the fixed point (0.5, 0.5); the raster settles on
  // the four pixels around it.
  CHECK(hutchinson_step(one, img, view) == img);
  CHECK((img(31, 31) && img(32, 31) && img(31, 32) && img(32, 32)));
}

TEST_CASE("chaos game") {
  const IfsSystem sys = sierpinski();
  const Viewport view;
  const BinaryImage reference = render_attractor(sys, view, 256, 256);
  const BinaryImage a = chaos_game(sys, 200000, 100, view, 256, 256, 1);
  const BinaryImage b = chaos_game(sys, 200000, 100, view, 256, 256, 99);
  MESSAGE("chaos vs deterministic: " << hamming_distance(a, reference) << ", seed spread " << hamming_distance(a, b));
  CHECK(hamming_distance(a, reference) <= 0.01);
  CHECK(hamming_distance(a, b) <= 0.01);
  CHECK(a == chaos_game(sys, 200000, 100, view, 256, 256, 1));
  for (const Map& m : sys.maps) {
    const Eigen::Vector2d fixed = (Eigen::Matrix2d::Identity() - m.linear()).lu().solve(m.translation());
    const auto px = view.pixel(fixed, 256, 256);
    REQUIRE(px.has_value());
    CHECK(a(px->first, px->second));
  }
  const double t = 0.5 * 32.5 / 64.0;
  const IfsSystem one = validate_ifs({Map{0.5, 0, t, 0, 0.5, t}});
  CHECK(chaos_game(one, 1000, 64, view, 64, 64, 5).count() == 1);
  CHECK_THROWS_AS(chaos_game(sys, 10, 10, view, 8, 8, 0), std::invalid_argument);
}

TEST_CASE("hamming_distance") {
  std::mt19937_64 rng(4);
  const BinaryImage a = random_image(20, 20, rng);
  CHECK(hamming_distance(a, a) == 0.0);
  CHECK(hamming_distance(a, a.complement()) == 1.0);
  BinaryImage b = a;
  b.set(7, 3, !a(7, 3));
  CHECK(hamming_distance(a, b) == 0.0025);
  CHECK_THROWS_AS(hamming_distance(a, BinaryImage(20, 21)), fnc::DimensionMismatch);
}

TEST_CASE("hausdorff_distance") {
  std::vector<Point> one{{0, 0}}, other{{3, 4}};
  CHECK(hausdorff_distance(one, other) == 5.0);
  CHECK(hausdorff_distance(one, one) == 0.0);
  CHECK_THROWS_AS(hausdorff_distance(one, std::vector<Point>{}), fnc::DataError);

  std::mt19937_64 rng(5);
  const Viewport view;
  int tested = 0;
  for (int t = 0; t < 500; ++t) {
    const auto a = set_points(random_image(8, 8, rng, 0.3), view);
    const auto b = set_points(random_image(8, 8, rng, 0.3), view);
    if (a.empty() || b.empty()) continue;
    CHECK(hausdorff_distance(a, b) == brute_hausdorff(a, b));
    ++tested;
  }
  CHECK(tested > 400);
}

TEST_CASE("metric axioms on random small sets") {
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<std::size_t> size(1, 12);
  for (int t = 0; t < 1000; ++t) {
    const auto a = random_points(size(rng), rng), b = random_points(size(rng), rng), c = random_points(size(rng), rng);
    CHECK(hausdorff_distance(a, a) == 0.0);
    CHECK(hausdorff_distance(a, b) == hausdorff_distance(b, a));
    CHECK(hausdorff_distance(a, c) <= hausdorff_distance(a, b) + hausdorff_distance(b, c) + 1e-12);

    const BinaryImage x = random_image(6, 6, rng), y = random_image(6, 6, rng), z = random_image(6, 6, rng);
    CHECK(hamming_distance(x, x) == 0.0);
    CHECK(hamming_distance(x, y) == hamming_distance(y, x));
    CHECK((hamming_distance(x, y) > 0.0) == !(x == y));
    CHECK(hamming_distance(x, z) <= hamming_distance(x, y) + hamming_distance(y, z) + 1e-15);
  }
}

TEST_CASE("collage_bound") {
  CHECK(collage_bound(0.01, 0.5) == doctest::Approx(0.02));
  CHECK(collage_bound(0.0, 0.5) == 0.0);
  CHECK(collage_bound(0.64, 0.5) == doctest::Approx(1.28));
  CHECK_THROWS_AS(collage_bound(0.1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(collage_bound(0.1, 0.0), std::invalid_argument);
}

TEST_CASE("collage theorem on the reference system") {
  const IfsSystem sys = sierpinski();
  const Viewport view;
  const BinaryImage target = chaos_game(sys, 200000, 100, view, 256, 256, 11);
  const double eps = collage_distance(sys, target, view);
  const double d = hamming_distance(render_attractor(sys, view, 256, 256), target);
  CHECK(d <= collage_bound(eps, sys.s) + 0.01);
  CHECK(collage_distance(sys, render_attractor(sys, view, 256, 256), view, Metric::hausdorff) == 0.0);
}

TEST_CASE("acceptance_probability") {
  CHECK(acceptance_probability(0.0, 3.0) == 0.5);
  CHECK(acceptance_probability(std::log(3.0), 1.0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(acceptance_probability(1e6, 1.0) == 0.0);
  CHECK(acceptance_probability(-1e6, 1.0) == 1.0);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int t = 0; t < 1000; ++t) {
    const double d = u(rng), beta = std::abs(u(rng)) + 1e-3;
    CHECK(acceptance_probability(d, beta) + acceptance_probability(-d, beta) == 1.0);
  }
}

TEST_CASE("inverse search") {
  const Viewport view;
  const IfsSystem sys = sierpinski();
  const BinaryImage target = render_attractor(sys, view, 128, 128);
  AnnealSchedule schedule;
  schedule.sweeps = 200;
  schedule.seed = 3;

  SUBCASE("warm start at the true coefficients") {
    const auto r = inverse_search(target, 3, schedule, view, sys.maps);
    CHECK(r.initial_delta == doctest::Approx(collage_distance(sys, target, view)));
    CHECK(r.best_delta <= 0.05);
    for (std::size_t i = 1; i < r.best_trace.size(); ++i) CHECK(r.best_trace[i] <= r.best_trace[i - 1]);
    CHECK(r.proposals == 200 * 18);
  }
  SUBCASE("incremental distance agrees with a full recomputation") {
    const auto r = inverse_search(target, 3, schedule, view);
    CHECK(r.best_delta == doctest::Approx(collage_distance(r.system, target, view)).epsilon(1e-12));
    CHECK(r.best_delta <= r.initial_delta);
  }
  SUBCASE("single-map target") {
    const IfsSystem one = validate_ifs({Map{0.5, 0, 0.25, 0, 0.5, 0.25}});
    const BinaryImage point = render_attractor(one, view, 64, 64);
    AnnealSchedule s = schedule;
    s.sweeps = 10000;
    const auto r = inverse_search(point, 1, s, view);
    CHECK(r.best_delta < 0.1);
  }
  SUBCASE("identical seeds give identical traces") {
    const auto a = inverse_search(target, 3, schedule, view);
    const auto b = inverse_search(target, 3, schedule, view);
    CHECK(a.proposal_deltas == b.proposal_deltas);
    CHECK(a.best_trace == b.best_trace);
    CHECK(a.system.maps == b.system.maps);
  }
  SUBCASE("chains do not depend on the thread count") {
    const auto serial = inverse_search_chains(target, 2, schedule, view, 3, 1);
    const auto parallel = inverse_search_chains(target, 2, schedule, view, 3, 3);
    CHECK(serial.best_trace == parallel.best_trace);
    double lowest = 1.0;
    for (int c = 0; c < 3; ++c) {
      AnnealSchedule s = schedule;
      s.seed = schedule.seed + c;
      lowest = std::min(lowest, inverse_search(target, 2, s, view).best_delta);
    }
    CHECK(serial.best_delta == lowest);
  }
  SUBCASE("Hausdorff metric") {
    AnnealSchedule s = schedule;
    s.sweeps = 3;
    const BinaryImage small = render_attractor(sys, view, 32, 32);
    const auto r = inverse_search(small, 3, s, view, sys.maps, Metric::hausdorff);
    CHECK(r.best_delta == 0.0);
  }
  SUBCASE("empty target") { CHECK_THROWS_AS(inverse_search(BinaryImage(8, 8), 1, schedule, view), fnc::DataError); }
}
