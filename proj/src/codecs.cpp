#include "fnc/codecs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "fnc/error.hpp"

namespace fnc::codec {

namespace {

struct Grid {
  int cols = 0;
  int rows = 0;
  int pad_right = 0;
  int pad_bottom = 0;
};

Grid block_grid(int width, int height, int b) {
  Grid g;
  g.cols = (width + b - 1) / b;
  g.rows = (height + b - 1) / b;
  g.pad_right = g.cols * b - width;
  g.pad_bottom = g.rows * b - height;
  return g;
}

std::uint16_t u16_field(int v, const char* what) {
  if (v < 0 || v > std::numeric_limits<std::uint16_t>::max())
    throw std::invalid_argument(std::string(what) + " does not fit the container header");
  return static_cast<std::uint16_t>(v);
}

io::Container image_container(io::Method method, int width, int height, int block_side, io::Bytes payload) {
  io::Container c;
  c.method = method;
  c.width = static_cast<std::uint32_t>(width);
  c.height = static_cast<std::uint32_t>(height);
  c.block_side = u16_field(block_side, "block side");
  if (block_side > 0) {
    const Grid g = block_grid(width, height, block_side);
    c.pad_right = u16_field(g.pad_right, "padding");
    c.pad_bottom = u16_field(g.pad_bottom, "padding");
  }
  c.payload = std::move(payload);
  return c;
}

void expect_method(const io::Container& c, io::Method m) {
  if (c.method != m)
    throw FormatError("expected a " + std::string(io::method_name(m)) + " container, found " +
                      std::string(io::method_name(c.method)));
}

void check_geometry(const io::Container& c, bool allow_unblocked) {
  if (c.width == 0 || c.height == 0) throw FormatError("container has no image dimensions");
  if (c.block_side == 0) {
    if (!allow_unblocked) throw FormatError("container block side is zero");
    return;
  }
  const Grid g = block_grid(static_cast<int>(c.width), static_cast<int>(c.height), c.block_side);
  if (g.pad_right != c.pad_right || g.pad_bottom != c.pad_bottom)
    throw FormatError("container padding does not match its geometry");
}

BinaryImage crop_block(const BinaryImage& img, int x0, int y0, int b) {
  BinaryImage out(b, b);
  for (int y = 0; y < b && y0 + y < img.height(); ++y)
    for (int x = 0; x < b && x0 + x < img.width(); ++x) out.set(x, y, img(x0 + x, y0 + y));
  return out;
}

void paste_block(BinaryImage& img, const BinaryImage& block, int x0, int y0) {
  for (int y = 0; y < block.height() && y0 + y < img.height(); ++y)
    for (int x = 0; x < block.width() && x0 + x < img.width(); ++x) img.set(x0 + x, y0 + y, block(x, y));
}

BinaryImage render_system(const std::vector<ifs::Map>& maps, int w, int h, int max_iterations) {
  if (maps.empty()) return BinaryImage(w, h);
  return ifs::render_attractor(ifs::validate_ifs(maps), ifs::Viewport{}, w, h, max_iterations);
}

template <typename M>
void write_matrix(io::ByteWriter& w, const M& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) w.f64(m(r, c));
}

template <typename M>
void read_matrix(io::ByteReader& r, M& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = r.f64();
}

}  // namespace

// ---------------------------------------------------------------- IFS

io::Bytes ifs_payload(const std::vector<std::vector<ifs::Map>>& systems) {
  io::ByteWriter w;
  for (const auto& maps : systems) {
    w.u32(static_cast<std::uint32_t>(maps.size()));
    for (const auto& m : maps)
      for (double v : m.coefficients()) w.f64(v);
  }
  return w.take();
}

std::vector<std::vector<ifs::Map>> read_ifs_payload(std::span<const std::uint8_t> payload, std::size_t records) {
  io::ByteReader r(payload);
  std::vector<std::vector<ifs::Map>> out(records);
  for (auto& maps : out) {
    const std::uint32_t k = r.u32();
    if (static_cast<std::size_t>(k) * 48 > r.remaining()) throw FormatError("truncated IFS record");
    maps.resize(k);
    for (auto& m : maps) {
      std::array<double, 6> coeffs;
      for (double& v : coeffs) v = r.f64();
      m = ifs::Map::from_coefficients(coeffs);
      if (!m.finite()) throw FormatError("non-finite IFS coefficient");
    }
  }
  r.expect_end("IFS payload");
  return out;
}

io::Container ifs_container(const std::vector<ifs::Map>& maps, int width, int height) {
  return image_container(io::Method::ifs, width, height, 0, ifs_payload({maps}));
}

IfsEncoding encode_ifs(const BinaryImage& image, const IfsOptions& opts) {
  if (image.empty()) throw DataError("empty image");
  if (opts.maps < 1) throw std::invalid_argument("need at least one map");
  if (opts.block_side < 0) throw std::invalid_argument("block side must be non-negative");
  if (opts.block_side > 0 && opts.init) throw std::invalid_argument("warm start applies to whole-image coding only");

  auto search = [&](const BinaryImage& target, double& delta) -> std::vector<ifs::Map> {
    if (target.count() == 0) return {};
    const auto r = ifs::inverse_search_chains(target, opts.maps, opts.schedule, ifs::Viewport{}, opts.chains,
                                              opts.threads, opts.init, opts.metric);
    delta = r.best_delta;
    return r.system.maps;
  };

  IfsEncoding enc;
  double total = 0.0;
  int coded = 0;
  if (opts.block_side == 0) {
    double d = 0.0;
    enc.systems.push_back(search(image, d));
    if (!enc.systems.back().empty()) total += d, ++coded;
  } else {
    const int b = opts.block_side;
    const Grid g = block_grid(image.width(), image.height(), b);
    for (int gy = 0; gy < g.rows; ++gy)
      for (int gx = 0; gx < g.cols; ++gx) {
        double d = 0.0;
        enc.systems.push_back(search(crop_block(image, gx * b, gy * b, b), d));
        if (!enc.systems.back().empty()) total += d, ++coded;
      }
  }
  enc.collage_delta = coded > 0 ? total / coded : 0.0;
  enc.container = image_container(io::Method::ifs, image.width(), image.height(), opts.block_side,
                                  ifs_payload(enc.systems));
  return enc;
}

std::vector<std::vector<ifs::Map>> ifs_systems(const io::Container& c) {
  expect_method(c, io::Method::ifs);
  check_geometry(c, true);
  std::size_t records = 1;
  if (c.block_side > 0) {
    const Grid g = block_grid(static_cast<int>(c.width), static_cast<int>(c.height), c.block_side);
    records = static_cast<std::size_t>(g.cols) * g.rows;
  }
  return read_ifs_payload(c.payload, records);
}

BinaryImage decode_ifs(const io::Container& c, int max_iterations) {
  const auto systems = ifs_systems(c);
  const int w = static_cast<int>(c.width), h = static_cast<int>(c.height);
  if (c.block_side == 0) return render_system(systems.front(), w, h, max_iterations);
  const int b = c.block_side;
  const Grid g = block_grid(w, h, b);
  BinaryImage out(w, h);
  for (int gy = 0; gy < g.rows; ++gy)
    for (int gx = 0; gx < g.cols; ++gx)
      paste_block(out, render_system(systems[static_cast<std::size_t>(gy) * g.cols + gx], b, b, max_iterations),
                  gx * b, gy * b);
  return out;
}

// ---------------------------------------------------------------- VQ

io::Bytes vq_payload(const VqPayload& p) {
  const auto m = static_cast<std::size_t>(p.codebook.cols());
  io::ByteWriter w;
  w.u32(static_cast<std::uint32_t>(p.codebook.rows()));
  w.u32(static_cast<std::uint32_t>(m));
  w.u32(static_cast<std::uint32_t>(p.indices.size()));
  for (Eigen::Index i = 0; i < p.codebook.size(); ++i) w.f64(p.codebook.data()[i]);
  w.bytes(vq::pack_indices(p.indices, vq::index_bits(m)));
  return w.take();
}

VqPayload read_vq_payload(std::span<const std::uint8_t> payload) {
  io::ByteReader r(payload);
  const std::uint32_t d = r.u32(), m = r.u32(), count = r.u32();
  if (d == 0 || m == 0) throw FormatError("empty VQ codebook");
  if (static_cast<std::uint64_t>(d) * m * 8 > r.remaining()) throw FormatError("truncated VQ codebook");
  VqPayload p;
  p.codebook.resize(d, m);
  for (Eigen::Index i = 0; i < p.codebook.size(); ++i) p.codebook.data()[i] = r.f64();
  if (!p.codebook.allFinite()) throw FormatError("non-finite VQ codeword");
  const int bits = vq::index_bits(m);
  const std::size_t packed = (static_cast<std::size_t>(count) * bits + 7) / 8;
  p.indices = vq::unpack_indices(r.bytes(packed), count, bits);
  r.expect_end("VQ payload");
  for (auto i : p.indices)
    if (i >= m) throw FormatError("VQ index out of range");
  return p;
}

vq::TrainResult<double> train_vq(const BinaryImage& image, const VqOptions& opts) {
  if (opts.block_side < 1) throw std::invalid_argument("block side must be positive");
  if (opts.codewords < 1) throw std::invalid_argument("need at least one codeword");
  const BlockTiling t = tile(image, opts.block_side);
  return vq::train_restarts<double>(t.blocks, opts.codewords, opts.schedule, opts.restarts, opts.threads);
}

io::Container vq_codebook_container(const vq::Codebook<double>& w, int block_side) {
  io::Container c;
  c.method = io::Method::vq;
  c.block_side = u16_field(block_side, "block side");
  c.payload = vq_payload({w, {}});
  return c;
}

io::Container encode_vq(const BinaryImage& image, const vq::Codebook<double>& w, int block_side, std::uint64_t seed) {
  const BlockTiling t = tile(image, block_side);
  Rng rng(seed);
  auto q = vq::quantize<double>(t.blocks, w, rng);
  return image_container(io::Method::vq, image.width(), image.height(), block_side, vq_payload({w, std::move(q.indices)}));
}

BinaryImage decode_vq(const io::Container& c) {
  expect_method(c, io::Method::vq);
  check_geometry(c, false);
  const VqPayload p = read_vq_payload(c.payload);
  const int b = c.block_side;
  if (p.codebook.rows() != static_cast<Eigen::Index>(b) * b)
    throw FormatError("codeword length does not match the block side");
  const int w = static_cast<int>(c.width), h = static_cast<int>(c.height);
  const Grid g = block_grid(w, h, b);
  if (p.indices.size() != static_cast<std::size_t>(g.cols) * g.rows)
    throw FormatError("VQ index count does not match the block grid");
  Eigen::MatrixXd blocks(p.codebook.rows(), static_cast<Eigen::Index>(p.indices.size()));
  for (std::size_t n = 0; n < p.indices.size(); ++n)
    blocks.col(static_cast<Eigen::Index>(n)) = p.codebook.col(p.indices[n]);
  return untile(blocks, b, w, h);
}

// ---------------------------------------------------------------- AE

io::Container ae_container(const ae::Model& model, ae::CodeFormat format) {
  return image_container(io::Method::ae, model.width, model.height, model.block_side,
                         ae::encode_payload(model, format));
}

ae::Model read_ae(const io::Container& c) {
  expect_method(c, io::Method::ae);
  check_geometry(c, false);
  return ae::decode_payload(c.payload, c.block_side, static_cast<int>(c.width), static_cast<int>(c.height));
}

BinaryImage decode_ae(const io::Container& c) { return read_ae(c).reconstruct_image(); }

ae::Model reencode(const ae::Model& trained, const BinaryImage& image) {
  const BlockTiling t = tile(image, trained.block_side);
  ae::Model m = trained;
  m.width = t.width;
  m.height = t.height;
  auto codes_of = [](const std::vector<ae::Stage>& stages, Eigen::MatrixXd x) {
    for (const auto& s : stages) x = ae::encode_blocks(s, x);
    return x;
  };
  if (!m.per_block) {
    auto& p = m.pipelines.front();
    p.codes = codes_of(p.stages, t.blocks);
    return m;
  }
  if (static_cast<Eigen::Index>(m.pipelines.size()) != t.blocks.cols())
    throw DimensionMismatch("per-block model was trained on a different block grid");
  for (std::size_t q = 0; q < m.pipelines.size(); ++q)
    m.pipelines[q].codes = codes_of(m.pipelines[q].stages, t.blocks.col(static_cast<Eigen::Index>(q)));
  return m;
}

// ---------------------------------------------------------------- series

SeriesModel fit_series(std::span<const double> samples, const SeriesOptions& opts) {
  if (samples.size() < 4) throw DataError("series needs at least four samples");
  for (double v : samples)
    if (!std::isfinite(v)) throw DataError("non-finite sample");
  SeriesModel m;
  m.kind = opts.kind;
  m.rescale = series::Rescaling::fit(samples);
  const std::vector<double> unit = m.rescale.to_unit(samples);

  if (opts.kind == SeriesKind::hertz) {
    std::vector<double> sorted(unit.begin(), unit.end() - 1);
    std::sort(sorted.begin(), sorted.end());
    const auto partition = series::build_partition(sorted, opts.min_count);
    TrainConfig cfg = opts.train;
    if (opts.auto_step && cfg.method == TrainMethod::gradient)
      cfg.eta0 = series::stable_step(unit, partition, opts.mode);
    m.hertz = series::fit(unit, partition, opts.mode, cfg).model;
  } else {
    if (opts.hidden < 1) throw std::invalid_argument("hidden layer needs at least one unit");
    const int dim = opts.dim > 0 ? opts.dim : series::estimate_dimension(unit);
    const Eigen::MatrixXd vectors = series::TimeSeries{unit, dim}.vectorized();
    Rng rng(opts.train.seed);
    const auto start = net::LayerWeights<double>::random(dim, opts.hidden, dim, rng, opts.bias);
    m.net = net::train_series(start, vectors, opts.train).weights;
  }

  double sq = 0.0;
  std::size_t n = 0;
  for (const auto& p : predict_series(m, samples)) {
    if (!p.actual) continue;
    const double r = std::abs(*p.actual - p.value);
    sq += r * r;
    m.max_residual = std::max(m.max_residual, r);
    ++n;
  }
  m.rmse = n > 0 ? std::sqrt(sq / static_cast<double>(n)) : 0.0;
  return m;
}

std::vector<Prediction> predict_series(const SeriesModel& model, std::span<const double> samples) {
  std::vector<Prediction> out;
  const std::size_t n = samples.size();
  if (model.kind == SeriesKind::hertz) {
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      Prediction p;
      p.index = i + 1;
      p.value = model.rescale.from_unit(series::eval_model(model.hertz, model.rescale.to_unit(samples[i])));
      if (i + 1 < n) p.actual = samples[i + 1];
      out.push_back(p);
    }
    return out;
  }
  const int d = model.dim();
  const Eigen::MatrixXd vectors = series::TimeSeries{model.rescale.to_unit(samples), d}.vectorized();
  for (Eigen::Index k = 0; k < vectors.cols(); ++k) {
    const auto a = net::forward(model.net, vectors.col(k));
    for (int j = 0; j < d; ++j) {
      Prediction p;
      p.index = static_cast<std::size_t>((k + 1) * d + j);
      p.value = model.rescale.from_unit(a.y[j]);
      if (p.index < n) p.actual = samples[p.index];
      out.push_back(p);
    }
  }
  return out;
}

io::Bytes series_payload(const SeriesModel& m) {
  io::ByteWriter w;
  w.u8(static_cast<std::uint8_t>(m.kind));
  if (m.kind == SeriesKind::hertz) {
    w.u8(static_cast<std::uint8_t>(m.hertz.mode));
    w.f64(m.rescale.offset);
    w.f64(m.rescale.scale);
    w.u32(static_cast<std::uint32_t>(m.hertz.partition.size()));
    for (const auto& b : m.hertz.partition.blocks()) {
      w.f64(b.lower);
      w.f64(b.upper);
      w.u64(b.count);
      w.f64(b.mean);
      w.f64(b.variance);
    }
    w.u32(static_cast<std::uint32_t>(m.hertz.coeffs.size()));
    for (Eigen::Index i = 0; i < m.hertz.coeffs.size(); ++i) w.f64(m.hertz.coeffs[i]);
  } else {
    const auto& n = m.net;
    w.u32(static_cast<std::uint32_t>(n.input_dim()));
    w.u32(static_cast<std::uint32_t>(n.hidden_dim()));
    w.u32(static_cast<std::uint32_t>(n.output_dim()));
    w.u8(n.trainable_bias ? 1 : 0);
    w.f64(n.lambda1);
    w.f64(n.lambda2);
    write_matrix(w, n.w1);
    write_matrix(w, n.w2);
    write_matrix(w, n.b1);
    write_matrix(w, n.b2);
    w.f64(m.rescale.offset);
    w.f64(m.rescale.scale);
  }
  w.f64(m.rmse);
  w.f64(m.max_residual);
  return w.take();
}

SeriesModel read_series_payload(std::span<const std::uint8_t> payload) {
  io::ByteReader r(payload);
  SeriesModel m;
  const std::uint8_t kind = r.u8();
  if (kind > 1) throw FormatError("unknown series model kind " + std::to_string(kind));
  m.kind = static_cast<SeriesKind>(kind);
  try {
    if (m.kind == SeriesKind::hertz) {
      const std::uint8_t mode = r.u8();
      if (mode > 1) throw FormatError("unknown model mode " + std::to_string(mode));
      m.hertz.mode = static_cast<series::ModelMode>(mode);
      m.rescale.offset = r.f64();
      m.rescale.scale = r.f64();
      const std::uint32_t count = r.u32();
      if (count == 0 || static_cast<std::size_t>(count) * 40 > r.remaining()) throw FormatError("bad partition size");
      std::vector<series::Block> blocks(count);
      for (auto& b : blocks) {
        b.lower = r.f64();
        b.upper = r.f64();
        b.count = static_cast<std::size_t>(r.u64());
        b.mean = r.f64();
        b.variance = r.f64();
      }
      m.hertz.partition = series::Partition(std::move(blocks));
      const std::uint32_t nc = r.u32();
      if (nc != m.hertz.coefficient_count()) throw FormatError("coefficient count does not match the partition");
      m.hertz.coeffs.resize(nc);
      for (std::uint32_t i = 0; i < nc; ++i) m.hertz.coeffs[i] = r.f64();
      m.hertz.validate();
    } else {
      const std::uint32_t d = r.u32(), hidden = r.u32(), out = r.u32();
      if (d == 0 || hidden == 0 || out != d) throw FormatError("bad network dimensions");
      if ((static_cast<std::uint64_t>(hidden) * d * 2 + hidden + out) * 8 > r.remaining())
        throw FormatError("truncated network weights");
      auto& n = m.net;
      n = net::LayerWeights<double>::zeros(d, hidden, out);
      n.trainable_bias = r.u8() != 0;
      n.lambda1 = r.f64();
      n.lambda2 = r.f64();
      read_matrix(r, n.w1);
      read_matrix(r, n.w2);
      read_matrix(r, n.b1);
      read_matrix(r, n.b2);
      n.validate();
      m.rescale.offset = r.f64();
      m.rescale.scale = r.f64();
    }
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
  if (!std::isfinite(m.rescale.offset) || !(m.rescale.scale > 0.0) || !std::isfinite(m.rescale.scale))
    throw FormatError("bad series rescaling");
  m.rmse = r.f64();
  m.max_residual = r.f64();
  r.expect_end("series payload");
  return m;
}

io::Container series_container(const SeriesModel& m) {
  io::Container c;
  c.method = io::Method::net;
  c.payload = series_payload(m);
  return c;
}

SeriesModel read_series(const io::Container& c) {
  expect_method(c, io::Method::net);
  return read_series_payload(c.payload);
}

}  // namespace fnc::codec
