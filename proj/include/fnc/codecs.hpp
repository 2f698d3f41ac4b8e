#pragma once

// Method payloads for the FNC1 container and the glue between images,
// series and the trained models. Every encoder is a pure function of its
// inputs and options, so repeated runs produce identical bytes.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fnc/autoencoder.hpp"
#include "fnc/binary_image.hpp"
#include "fnc/container.hpp"
#include "fnc/ifs.hpp"
#include "fnc/layered_net.hpp"
#include "fnc/series_model.hpp"
#include "fnc/train_config.hpp"
#include "fnc/vq.hpp"

namespace fnc::codec {

// ---------------------------------------------------------------- IFS

struct IfsOptions {
  int maps = 3;
  ifs::AnnealSchedule schedule;
  int chains = 1;
  int threads = 1;
  int block_side = 0;  // 0 codes the whole image with one system
  ifs::Metric metric = ifs::Metric::hamming;
  std::optional<std::vector<ifs::Map>> init;  // warm start, whole-image mode only
};

struct IfsEncoding {
  io::Container container;
  std::vector<std::vector<ifs::Map>> systems;  // one per block; empty for blank blocks
  double collage_delta = 0.0;                  // mean best delta over coded blocks
};

/// A sequence of records, each u32 k followed by 6k f64 coefficients
/// (a, b, c, d, e, f per map).
io::Bytes ifs_payload(const std::vector<std::vector<ifs::Map>>& systems);
std::vector<std::vector<ifs::Map>> read_ifs_payload(std::span<const std::uint8_t> payload, std::size_t records);

io::Container ifs_container(const std::vector<ifs::Map>& maps, int width, int height);
IfsEncoding encode_ifs(const BinaryImage& image, const IfsOptions& opts);

/// Each block (or the whole image) is the rendered attractor of its system
/// on the unit viewport.
BinaryImage decode_ifs(const io::Container& c, int max_iterations = 64);

/// The systems stored in an IFS container, one entry per block.
std::vector<std::vector<ifs::Map>> ifs_systems(const io::Container& c);

// ---------------------------------------------------------------- VQ

inline constexpr int kDefaultVqBlockSide = 4;
inline constexpr int kDefaultCodewords = 16;

struct VqOptions {
  int block_side = kDefaultVqBlockSide;
  int codewords = kDefaultCodewords;
  vq::LearningSchedule schedule;
  int restarts = 1;
  int threads = 1;
};

struct VqPayload {
  vq::Codebook<double> codebook;
  std::vector<std::uint32_t> indices;
};

/// u32 d, u32 m, u32 count, codebook column by column (f64), then count
/// indices packed at index_bits(m) bits, least significant bit first.
io::Bytes vq_payload(const VqPayload& p);
VqPayload read_vq_payload(std::span<const std::uint8_t> payload);

vq::TrainResult<double> train_vq(const BinaryImage& image, const VqOptions& opts);

/// Codebook-only container (count 0) for `vq train`.
io::Container vq_codebook_container(const vq::Codebook<double>& w, int block_side);

io::Container encode_vq(const BinaryImage& image, const vq::Codebook<double>& w, int block_side, std::uint64_t seed);
BinaryImage decode_vq(const io::Container& c);

// ---------------------------------------------------------------- AE

io::Container ae_container(const ae::Model& model, ae::CodeFormat format);
ae::Model read_ae(const io::Container& c);
BinaryImage decode_ae(const io::Container& c);

/// Codes `image` with the stages of a trained model. Per-block models need
/// the same block grid as the image they were trained on.
ae::Model reencode(const ae::Model& trained, const BinaryImage& image);

// ---------------------------------------------------------------- series

enum class SeriesKind : std::uint8_t { hertz = 0, net = 1 };

struct SeriesOptions {
  SeriesKind kind = SeriesKind::hertz;
  series::ModelMode mode = series::ModelMode::linear;
  std::size_t min_count = series::kDefaultMinCount;
  TrainConfig train;
  bool auto_step = true;  // Hertz: eta0 from stable_step()
  int hidden = 16;
  int dim = 0;  // 0 estimates the characteristic dimension
  bool bias = true;
};

struct SeriesModel {
  SeriesKind kind = SeriesKind::hertz;
  series::Rescaling rescale;
  series::PiecewiseModel hertz;
  net::LayerWeights<double> net;
  // Training residuals in the original units.
  double rmse = 0.0;
  double max_residual = 0.0;

  int dim() const { return kind == SeriesKind::hertz ? 1 : static_cast<int>(net.input_dim()); }
};

struct Prediction {
  std::size_t index = 0;  // sample index being predicted
  double value = 0.0;
  std::optional<double> actual;
};

SeriesModel fit_series(std::span<const double> samples, const SeriesOptions& opts);

/// One-step predictions: x_{i+1} from x_i for Hertz models, the next
/// disjoint d-block from the current one for nets.
std::vector<Prediction> predict_series(const SeriesModel& model, std::span<const double> samples);

/// Leading u8 kind. Hertz: u8 mode, f64 offset, f64 scale, u32 M, per
/// block f64 lower, f64 upper, u64 count, f64 mean, f64 variance, u32 n,
/// n f64 coefficients. Net: u32 d, u32 hidden, u32 out, u8 bias,
/// f64 lambda1, f64 lambda2, W1, W2 row-major, b1, b2, f64 offset,
/// f64 scale. Both end with f64 rmse, f64 max residual.
io::Bytes series_payload(const SeriesModel& m);
SeriesModel read_series_payload(std::span<const std::uint8_t> payload);

io::Container series_container(const SeriesModel& m);
SeriesModel read_series(const io::Container& c);

}  // namespace fnc::codec
