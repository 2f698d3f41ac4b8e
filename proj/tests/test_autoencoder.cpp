#include <cmath>
#include <random>

#include "doctest.h"
#include "fnc/autoencoder.hpp"
#include "fnc/container.hpp"
#include "fnc/error.hpp"
#include "fnc/ifs.hpp"
#include "oracles.hpp"

using namespace fnc::ae;
using fnc::BinaryImage;

namespace {

BinaryImage random_image(int w, int h, std::mt19937_64& rng) {
  std::bernoulli_distribution on(0.5);
  BinaryImage img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img.set(x, y, on(rng));
  return img;
}

double resummed_cost(const Stage& s, const Eigen::MatrixXd& blocks) {
  double e = 0.0;
  for (Eigen::Index q = 0; q < blocks.cols(); ++q) {
    Eigen::VectorXd z(s.hidden_dim());
    for (Eigen::Index k = 0; k < z.size(); ++k) {
      double a = 0.0;
      for (Eigen::Index j = 0; j < blocks.rows(); ++j) a += s.w1(k, j) * blocks(j, q);
      z[k] = 1.0 / (1.0 + std::exp(-s.lambda1 * a));
    }
    for (Eigen::Index l = 0; l < blocks.rows(); ++l) {
      double a = 0.0;
      for (Eigen::Index k = 0; k < z.size(); ++k) a += s.w2(l, k) * z[k];
      const double y = 1.0 / (1.0 + std::exp(-s.lambda2 * a));
      e += (blocks(l, q) - y) * (blocks(l, q) - y);
    }
  }
  return e;
}

}  // namespace

TEST_CASE("tile and untile") {
  SUBCASE("100x100 into 20x20 blocks") {
    const auto t = tile(BinaryImage(100, 100), 20);
    CHECK(t.block_count() == 25);
    CHECK(t.blocks.rows() == 400);
    CHECK(t.blocks.cols() == 25);
    CHECK(t.pad_right() == 0);
  }
  SUBCASE("single pixel image") {
    BinaryImage img(1, 1);
    img.set(0, 0);
    const auto t = tile(img, 20);
    CHECK(t.block_count() == 1);
    CHECK(t.blocks(0, 0) == 1.0);
    CHECK(t.blocks.sum() == 1.0);
    CHECK(t.pad_right() == 19);
    CHECK(t.pad_bottom() == 19);
    CHECK(untile(t) == img);
  }
  SUBCASE("random sizes round-trip") {
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<int> side(1, 70), block(1, 25);
    for (int t = 0; t < 60; ++t) {
      const BinaryImage img = t == 0 ? random_image(57, 43, rng) : random_image(side(rng), side(rng), rng);
      const int b = t == 0 ? 20 : block(rng);
      CHECK(untile(tile(img, b)) == img);
    }
  }
  SUBCASE("block layout is row-major") {
    BinaryImage img(4, 4);
    img.set(3, 0);  // block 1, pixel 1
    img.set(0, 3);  // block 2, pixel 2
    const auto t = tile(img, 2);
    CHECK(t.blocks(1, 1) == 1.0);
    CHECK(t.blocks(2, 2) == 1.0);
    CHECK(t.blocks.sum() == 2.0);
  }
}

TEST_CASE("binarize ties go to zero") {
  Eigen::MatrixXd x(1, 3);
  x << 0.5, 0.5000001, 0.4999;
  const Eigen::MatrixXd b = binarize(x);
  CHECK(b(0, 0) == 0.0);
  CHECK(b(0, 1) == 1.0);
  CHECK(b(0, 2) == 0.0);
}

TEST_CASE("encode and decode") {
  SUBCASE("zero weights") {
    const Stage s = Stage::zeros(6, 3, 6);
    CHECK((encode(s, Eigen::VectorXd::Ones(6)).array() == 0.5).all());
    const Eigen::VectorXd y = decode(s, Eigen::VectorXd::Constant(3, 0.5));
    CHECK((y.array() == 0.5).all());
    CHECK(binarize(y).sum() == 0.0);
  }
  SUBCASE("M = 2 against direct evaluation") {
    Stage s = Stage::zeros(2, 1, 2);
    s.w1 << 0.3, -1.2;
    s.w2 << 2.0, -0.7;
    const Eigen::Vector2d x(1.0, 1.0);
    const double z = 1.0 / (1.0 + std::exp(-(0.3 - 1.2)));
    CHECK(encode(s, x)[0] == doctest::Approx(z).epsilon(1e-15));
    const Eigen::VectorXd y = decode(s, encode(s, x));
    CHECK(y[0] == doctest::Approx(1.0 / (1.0 + std::exp(-2.0 * z))).epsilon(1e-15));
    CHECK(y[1] == doctest::Approx(1.0 / (1.0 + std::exp(0.7 * z))).epsilon(1e-15));
  }
  SUBCASE("lengths") {
    fnc::Rng rng(2);
    const Stage s = make_stage(400, rng);
    CHECK(encode(s, Eigen::VectorXd::Zero(400)).size() == 200);
    CHECK(decode(s, Eigen::VectorXd::Zero(200)).size() == 400);
    CHECK(make_stage(7, rng).hidden_dim() == 3);
    CHECK_THROWS_AS(decode(s, Eigen::VectorXd::Zero(5)), fnc::DimensionMismatch);
    CHECK_THROWS_AS(encode(s, Eigen::VectorXd::Zero(5)), fnc::DimensionMismatch);
  }
}

TEST_CASE("stage_cost") {
  CHECK(stage_cost(Stage::zeros(4, 2, 4), Eigen::MatrixXd::Constant(4, 3, 0.5)) == 0.0);

  Stage s = Stage::zeros(2, 1, 2);
  s.w2 << -1.0, -1.0;
  s.lambda2 = 1e4;
  Eigen::MatrixXd one(2, 1);
  one << 1.0, 0.0;
  CHECK(stage_cost(s, one) == doctest::Approx(1.0).epsilon(1e-12));

  fnc::Rng rng(3);
  std::mt19937_64 data_rng(4);
  std::bernoulli_distribution on(0.4);
  const Stage r = make_stage(9, rng);
  Eigen::MatrixXd blocks(9, 12);
  for (Eigen::Index i = 0; i < blocks.size(); ++i) blocks.data()[i] = on(data_rng);
  CHECK(stage_cost(r, blocks) == doctest::Approx(resummed_cost(r, blocks)).epsilon(1e-10));
}

TEST_CASE("train_stage") {
  fnc::TrainConfig cfg;
  cfg.eta0 = 0.5;
  cfg.decay_tau = 1e6;
  SUBCASE("single all-zero block") {
    cfg.max_iters = 200;
    const auto r = train_stage(Eigen::MatrixXd::Zero(4, 1), cfg);
    CHECK(binarize(decode_blocks(r.weights, encode_blocks(r.weights, Eigen::MatrixXd::Zero(4, 1)))).sum() == 0.0);
  }
  SUBCASE("two complementary blocks reconstruct exactly") {
    Eigen::MatrixXd toy(4, 2);
    toy << 0, 1, 0, 1, 1, 0, 1, 0;
    cfg.max_iters = 5000;
    const auto r = train_stage(toy, cfg);
    const Eigen::MatrixXd out = binarize(decode_blocks(r.weights, encode_blocks(r.weights, toy)));
    MESSAGE("toy cost " << r.initial_cost << " -> " << r.final_cost);
    CHECK(out == toy);
  }
  SUBCASE("cost decreases and runs are reproducible") {
    std::mt19937_64 data_rng(5);
    std::bernoulli_distribution on(0.5);
    Eigen::MatrixXd blocks(16, 10);
    for (Eigen::Index i = 0; i < blocks.size(); ++i) blocks.data()[i] = on(data_rng);
    cfg.eta0 = 0.05;
    cfg.max_iters = 300;
    cfg.seed = 9;
    const auto a = train_stage(blocks, cfg);
    const auto b = train_stage(blocks, cfg);
    CHECK(a.final_cost < a.initial_cost);
    for (std::size_t k = 1; k < a.cost_trace.size(); ++k) CHECK(a.cost_trace[k] <= a.cost_trace[k - 1] + 1e-12);
    CHECK(a.weights.w1 == b.weights.w1);
    CHECK(a.weights.w2 == b.weights.w2);
  }
}

TEST_CASE("autoencoder gradient check with M = 6") {
  fnc::Rng rng(6);
  std::mt19937_64 data_rng(7);
  std::bernoulli_distribution on(0.5);
  const Stage s = make_stage(6, rng);
  REQUIRE(s.hidden_dim() == 3);
  Eigen::MatrixXd blocks(6, 5);
  for (Eigen::Index i = 0; i < blocks.size(); ++i) blocks.data()[i] = on(data_rng);
  auto cost_at = [&](const Eigen::VectorXd& p) {
    Stage probe = s;
    probe.assign(p);
    return resummed_cost(probe, blocks);
  };
  const auto g = fnc::net::cost_gradient(s, blocks, blocks);
  const double dev =
      fnc::testing::max_relative_deviation(g.grad.flatten(), fnc::testing::central_difference(cost_at, s.flatten()));
  CHECK(dev < 1e-5);
}

TEST_CASE("iterate_stages") {
  fnc::TrainConfig cfg;
  cfg.eta0 = 0.05;
  cfg.max_iters = 20;
  std::mt19937_64 data_rng(8);
  std::bernoulli_distribution on(0.5);
  Eigen::MatrixXd blocks(16, 6);
  for (Eigen::Index i = 0; i < blocks.size(); ++i) blocks.data()[i] = on(data_rng);

  SUBCASE("depth one is a single stage") {
    const auto p = iterate_stages(blocks, 1, cfg);
    const auto r = train_stage(blocks, cfg);
    REQUIRE(p.stages.size() == 1);
    CHECK(p.stages[0].w1 == r.weights.w1);
    CHECK(p.codes == encode_blocks(r.weights, blocks));
  }
  SUBCASE("stage two trains on stage one codes") {
    const auto p = iterate_stages(blocks, 2, cfg);
    REQUIRE(p.stages.size() == 2);
    CHECK(p.stages[1].input_dim() == 8);
    CHECK(p.code_length() == 4);
    CHECK(p.codes == encode_blocks(p.stages[1], encode_blocks(p.stages[0], blocks)));
    CHECK(reconstruct(p.stages, p.codes).rows() == 16);
  }
  SUBCASE("dimensions") {
    CHECK(stage_dims(400, 2) == std::vector<int>{200, 100});
    CHECK(stage_dims(7, 2) == std::vector<int>{3, 1});
    CHECK_THROWS_AS(stage_dims(7, 3), std::invalid_argument);
    cfg.max_iters = 1;
    CHECK(iterate_stages(Eigen::MatrixXd::Zero(400, 1), 2, cfg).code_length() == 100);
  }
}

TEST_CASE("model serialization and byte accounting") {
  const BinaryImage leaf =
      fnc::ifs::render_attractor(fnc::ifs::sierpinski(), fnc::ifs::Viewport{}, 40, 30);
  AeConfig cfg;
  cfg.train.eta0 = 0.05;
  cfg.train.max_iters = 30;

  for (const bool per_block : {false, true})
    for (const auto format : {CodeFormat::f64, CodeFormat::u8}) {
      CAPTURE(per_block);
      cfg.per_block = per_block;
      cfg.trainable_bias = per_block;
      const Model m = train_model(leaf, 8, cfg);
      const auto payload = encode_payload(m, format);
      const auto acc = account(m, format);
      CHECK(acc.original_bytes == (40 * 30 + 7) / 8);
      CHECK(acc.total() == payload.size() + fnc::io::kContainerHeaderBytes);
      CHECK(acc.not_smaller());

      const Model back = decode_payload(payload, 8, 40, 30);
      CHECK(encode_payload(back, format) == payload);
      if (format == CodeFormat::f64) {
        CHECK(back.reconstruct_image() == m.reconstruct_image());
      }
    }
  CHECK_THROWS_AS(decode_payload(std::vector<std::uint8_t>{0, 0}, 8, 40, 30), fnc::FormatError);
}
