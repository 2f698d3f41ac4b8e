#include "fnc/autoencoder.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fnc/bytes.hpp"
#include "fnc/container.hpp"
#include "fnc/error.hpp"

namespace fnc::ae {

Stage make_stage(int block_length, Rng& rng, bool trainable_bias) {
  if (block_length < 2) throw std::invalid_argument("a stage needs at least two inputs");
  const double scale = 1.0 / std::sqrt(static_cast<double>(block_length));
  return Stage::random(block_length, block_length / 2, block_length, rng, trainable_bias, scale);
}

Eigen::VectorXd encode(const Stage& stage, const Eigen::VectorXd& block) { return net::forward(stage, block).z; }

Eigen::VectorXd decode(const Stage& stage, const Eigen::VectorXd& code) {
  if (code.size() != stage.hidden_dim()) throw DimensionMismatch("code length does not match the stage");
  return net::sigmoid((stage.w2 * code + stage.b2).eval(), stage.lambda2);
}

Eigen::MatrixXd encode_blocks(const Stage& stage, const Eigen::MatrixXd& blocks) {
  return net::forward_batch(stage, blocks).z;
}

Eigen::MatrixXd decode_blocks(const Stage& stage, const Eigen::MatrixXd& codes) {
  if (codes.rows() != stage.hidden_dim()) throw DimensionMismatch("code length does not match the stage");
  return net::sigmoid(((stage.w2 * codes).colwise() + stage.b2).eval(), stage.lambda2);
}

double stage_cost(const Stage& stage, const Eigen::MatrixXd& blocks) {
  if (blocks.cols() == 0) throw DataError("no blocks");
  return net::pair_cost(stage, blocks, blocks);
}

net::TrainResult<double> train_stage(const Eigen::MatrixXd& blocks, const TrainConfig& cfg, bool trainable_bias) {
  if (blocks.cols() == 0) throw DataError("no blocks");
  Rng rng(cfg.seed);
  const Stage start = make_stage(static_cast<int>(blocks.rows()), rng, trainable_bias);
  return net::train(start, blocks, blocks, cfg);
}

std::vector<int> stage_dims(int block_length, int depth) {
  if (depth < 1) throw std::invalid_argument("depth must be at least 1");
  std::vector<int> dims;
  int m = block_length;
  for (int s = 0; s < depth; ++s) {
    m /= 2;
    if (m < 1) throw std::invalid_argument("depth " + std::to_string(depth) + " exhausts a block of length " +
                                           std::to_string(block_length));
    dims.push_back(m);
  }
  return dims;
}

Pipeline iterate_stages(const Eigen::MatrixXd& blocks, int depth, const TrainConfig& cfg, bool trainable_bias) {
  stage_dims(static_cast<int>(blocks.rows()), depth);
  Pipeline p;
  Eigen::MatrixXd input = blocks;
  for (int s = 0; s < depth; ++s) {
    TrainConfig stage_cfg = cfg;
    stage_cfg.seed = cfg.seed + static_cast<std::uint64_t>(s);
    auto r = train_stage(input, stage_cfg, trainable_bias);
    p.initial_costs.push_back(r.initial_cost);
    p.final_costs.push_back(r.final_cost);
    input = encode_blocks(r.weights, input);
    p.stages.push_back(std::move(r.weights));
  }
  p.codes = std::move(input);
  return p;
}

Eigen::MatrixXd reconstruct(const std::vector<Stage>& stages, const Eigen::MatrixXd& codes) {
  Eigen::MatrixXd x = codes;
  for (auto it = stages.rbegin(); it != stages.rend(); ++it) x = decode_blocks(*it, x);
  return x;
}

Eigen::MatrixXd Model::codes() const {
  if (pipelines.empty()) return {};
  if (!per_block) return pipelines.front().codes;
  Eigen::MatrixXd out(pipelines.front().code_length(), static_cast<Eigen::Index>(pipelines.size()));
  for (std::size_t q = 0; q < pipelines.size(); ++q) out.col(static_cast<Eigen::Index>(q)) = pipelines[q].codes;
  return out;
}

Eigen::MatrixXd Model::reconstruct_blocks() const {
  if (!per_block) return reconstruct(pipelines.front().stages, pipelines.front().codes);
  const Eigen::Index m = static_cast<Eigen::Index>(block_side) * block_side;
  Eigen::MatrixXd out(m, static_cast<Eigen::Index>(pipelines.size()));
  for (std::size_t q = 0; q < pipelines.size(); ++q)
    out.col(static_cast<Eigen::Index>(q)) = reconstruct(pipelines[q].stages, pipelines[q].codes);
  return out;
}

BinaryImage Model::reconstruct_image() const { return untile(reconstruct_blocks(), block_side, width, height); }

Model train_model(const BinaryImage& image, int block_side, const AeConfig& cfg) {
  const BlockTiling t = tile(image, block_side);
  Model m;
  m.block_side = block_side;
  m.width = t.width;
  m.height = t.height;
  m.depth = cfg.depth;
  m.per_block = cfg.per_block;
  m.trainable_bias = cfg.trainable_bias;
  if (!cfg.per_block) {
    m.pipelines.push_back(iterate_stages(t.blocks, cfg.depth, cfg.train, cfg.trainable_bias));
    return m;
  }
  for (Eigen::Index q = 0; q < t.blocks.cols(); ++q) {
    TrainConfig block_cfg = cfg.train;
    block_cfg.seed = cfg.train.seed + static_cast<std::uint64_t>(q) * 1000003u;
    m.pipelines.push_back(iterate_stages(t.blocks.col(q), cfg.depth, block_cfg, cfg.trainable_bias));
  }
  return m;
}

namespace {

constexpr std::size_t kPayloadFixedBytes = 1 + 1 + 1 + 2 + 4;
constexpr std::size_t kPayloadStageBytes = 4 + 4 + 8 + 8;

std::size_t network_values(const Stage& s, bool bias) {
  return static_cast<std::size_t>(s.w1.size() + s.w2.size() + (bias ? s.b1.size() + s.b2.size() : 0));
}

template <typename M>
void write_matrix(io::ByteWriter& w, const M& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) w.f64(m(r, c));
}

template <typename M>
void read_matrix(io::ByteReader& r, M& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(i, c) = r.f64();
}

}  // namespace

ByteAccounting account(const Model& model, CodeFormat format) {
  ByteAccounting a;
  a.original_bytes = (static_cast<std::size_t>(model.width) * model.height + 7) / 8;
  const Eigen::MatrixXd codes = model.codes();
  a.code_bytes = static_cast<std::size_t>(codes.size()) * (format == CodeFormat::f64 ? 8 : 1);
  for (const auto& p : model.pipelines)
    for (const auto& s : p.stages) a.weight_bytes += 8 * network_values(s, model.trainable_bias);
  a.header_bytes = io::kContainerHeaderBytes + kPayloadFixedBytes + kPayloadStageBytes * model.depth;
  return a;
}

std::vector<std::uint8_t> encode_payload(const Model& model, CodeFormat format) {
  if (model.pipelines.empty()) throw DataError("model has no networks");
  const Eigen::MatrixXd codes = model.codes();
  io::ByteWriter w;
  w.u8(static_cast<std::uint8_t>(format));
  w.u8(model.per_block ? 1 : 0);
  w.u8(model.trainable_bias ? 1 : 0);
  w.u16(static_cast<std::uint16_t>(model.depth));
  w.u32(static_cast<std::uint32_t>(codes.cols()));
  for (const Stage& s : model.pipelines.front().stages) {
    w.u32(static_cast<std::uint32_t>(s.input_dim()));
    w.u32(static_cast<std::uint32_t>(s.hidden_dim()));
    w.f64(s.lambda1);
    w.f64(s.lambda2);
  }
  for (const auto& p : model.pipelines)
    for (const Stage& s : p.stages) {
      write_matrix(w, s.w1);
      write_matrix(w, s.w2);
      if (model.trainable_bias) {
        write_matrix(w, s.b1);
        write_matrix(w, s.b2);
      }
    }
  for (Eigen::Index q = 0; q < codes.cols(); ++q)
    for (Eigen::Index i = 0; i < codes.rows(); ++i) {
      if (format == CodeFormat::f64)
        w.f64(codes(i, q));
      else
        w.u8(static_cast<std::uint8_t>(std::lround(std::clamp(codes(i, q), 0.0, 1.0) * 255.0)));
    }
  return w.take();
}

Model decode_payload(std::span<const std::uint8_t> payload, int block_side, int width, int height) {
  io::ByteReader r(payload);
  const std::uint8_t format = r.u8();
  if (format > 1) throw FormatError("unknown code format " + std::to_string(format));
  Model m;
  m.block_side = block_side;
  m.width = width;
  m.height = height;
  m.per_block = r.u8() != 0;
  m.trainable_bias = r.u8() != 0;
  m.depth = r.u16();
  const std::uint32_t q = r.u32();
  if (block_side < 1 || width < 1 || height < 1) throw FormatError("bad autoencoder geometry");
  const long expected_blocks =
      static_cast<long>((width + block_side - 1) / block_side) * ((height + block_side - 1) / block_side);
  if (m.depth < 1 || static_cast<long>(q) != expected_blocks)
    throw FormatError("autoencoder payload does not match the image geometry");
  const int block_length = block_side * block_side;
  std::vector<int> dims;
  try {
    dims = stage_dims(block_length, m.depth);
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }

  std::vector<Stage> shapes;
  int in = block_length;
  for (int s = 0; s < m.depth; ++s) {
    const std::uint32_t stage_in = r.u32(), hidden = r.u32();
    if (static_cast<int>(stage_in) != in || static_cast<int>(hidden) != dims[s])
      throw FormatError("autoencoder stage dimensions are inconsistent");
    Stage st = Stage::zeros(in, hidden, in);
    st.lambda1 = r.f64();
    st.lambda2 = r.f64();
    st.trainable_bias = m.trainable_bias;
    shapes.push_back(std::move(st));
    in = static_cast<int>(hidden);
  }

  const std::size_t networks = m.per_block ? q : 1;
  for (std::size_t n = 0; n < networks; ++n) {
    Pipeline p;
    for (const Stage& shape : shapes) {
      Stage st = shape;
      read_matrix(r, st.w1);
      read_matrix(r, st.w2);
      if (m.trainable_bias) {
        read_matrix(r, st.b1);
        read_matrix(r, st.b2);
      }
      st.validate();
      p.stages.push_back(std::move(st));
    }
    m.pipelines.push_back(std::move(p));
  }

  Eigen::MatrixXd codes(dims.back(), q);
  for (Eigen::Index c = 0; c < codes.cols(); ++c)
    for (Eigen::Index i = 0; i < codes.rows(); ++i) codes(i, c) = format == 0 ? r.f64() : r.u8() / 255.0;
  r.expect_end("autoencoder payload");
  if (!codes.allFinite()) throw FormatError("non-finite autoencoder code");
  if (m.per_block)
    for (std::size_t n = 0; n < networks; ++n) m.pipelines[n].codes = codes.col(static_cast<Eigen::Index>(n));
  else
    m.pipelines.front().codes = std::move(codes);
  return m;
}

}  // namespace fnc::ae
