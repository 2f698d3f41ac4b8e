#pragma once

// Block autoencoder: an image is cut into b x b blocks, each block is an
// M = b^2 intensity vector, and an M -> floor(M/2) -> M sigmoid network is
// trained to reproduce it. Stages can be stacked on the codes.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "fnc/binary_image.hpp"
#include "fnc/blocks.hpp"
#include "fnc/layered_net.hpp"
#include "fnc/train_config.hpp"

namespace fnc::ae {

using Stage = net::LayerWeights<double>;

using fnc::BlockTiling;
using fnc::binarize;
using fnc::tile;
using fnc::untile;

/// Random stage with in = out = M and hidden = floor(M/2); weights uniform
/// in [-1/sqrt(M), 1/sqrt(M)].
Stage make_stage(int block_length, Rng& rng, bool trainable_bias = false);

Eigen::VectorXd encode(const Stage& stage, const Eigen::VectorXd& block);
Eigen::VectorXd decode(const Stage& stage, const Eigen::VectorXd& code);
Eigen::MatrixXd encode_blocks(const Stage& stage, const Eigen::MatrixXd& blocks);
Eigen::MatrixXd decode_blocks(const Stage& stage, const Eigen::MatrixXd& codes);

/// E = sum over blocks and pixels of (x - y(x))^2, before binarization.
double stage_cost(const Stage& stage, const Eigen::MatrixXd& blocks);

struct AeConfig {
  TrainConfig train;
  int depth = 1;
  bool per_block = false;  // one network per block instead of one shared network
  bool trainable_bias = false;
};

/// One pipeline: stages in application order and the final codes
/// (hidden_dim of the last stage x number of blocks).
struct Pipeline {
  std::vector<Stage> stages;
  Eigen::MatrixXd codes;
  std::vector<double> initial_costs;
  std::vector<double> final_costs;

  Eigen::Index code_length() const { return codes.rows(); }
};

/// Trains a fresh stage on `blocks` (targets = inputs), initialized from
/// cfg.train.seed.
net::TrainResult<double> train_stage(const Eigen::MatrixXd& blocks, const TrainConfig& cfg,
                                     bool trainable_bias = false);

/// Stage s + 1 is trained on the codes of stage s. Throws
/// std::invalid_argument when halving would leave fewer than one hidden unit.
Pipeline iterate_stages(const Eigen::MatrixXd& blocks, int depth, const TrainConfig& cfg,
                        bool trainable_bias = false);

/// Code lengths M/2, M/4, ... for `depth` stages.
std::vector<int> stage_dims(int block_length, int depth);

/// Runs the cascade of decoders from final codes back to block space.
Eigen::MatrixXd reconstruct(const std::vector<Stage>& stages, const Eigen::MatrixXd& codes);

enum class CodeFormat : std::uint8_t { f64 = 0, u8 = 1 };

/// Trained model for a whole tiling: one shared pipeline, or one pipeline
/// per block column when per_block is set.
struct Model {
  int block_side = kDefaultBlockSide;
  int width = 0;
  int height = 0;
  int depth = 1;
  bool per_block = false;
  bool trainable_bias = false;
  std::vector<Pipeline> pipelines;

  Eigen::MatrixXd codes() const;  // code_length x Q
  Eigen::MatrixXd reconstruct_blocks() const;
  BinaryImage reconstruct_image() const;
};

Model train_model(const BinaryImage& image, int block_side, const AeConfig& cfg);

/// Byte budget of a serialized model against the packed original raster.
struct ByteAccounting {
  std::size_t original_bytes = 0;  // ceil(W H / 8)
  std::size_t code_bytes = 0;
  std::size_t weight_bytes = 0;
  std::size_t header_bytes = 0;  // container header and payload metadata

  std::size_t total() const { return code_bytes + weight_bytes + header_bytes; }
  bool not_smaller() const { return code_bytes + weight_bytes >= original_bytes; }
};

ByteAccounting account(const Model& model, CodeFormat format);

/// Payload layout (little-endian): u8 code format, u8 per_block, u8 bias,
/// u16 depth, u32 Q, then per stage u32 in, u32 hidden, f64 lambda1,
/// f64 lambda2; then per network per stage W1, W2 row-major and, with bias,
/// b1, b2 (f64); then codes block by block (f64, or u8 as round(255 z)).
std::vector<std::uint8_t> encode_payload(const Model& model, CodeFormat format);
Model decode_payload(std::span<const std::uint8_t> payload, int block_side, int width, int height);

}  // namespace fnc::ae
