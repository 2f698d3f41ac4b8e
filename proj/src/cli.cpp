#include "fnc/cli.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fnc/autoencoder.hpp"
#include "fnc/codecs.hpp"
#include "fnc/container.hpp"
#include "fnc/error.hpp"
#include "fnc/ifs.hpp"
#include "fnc/pbm.hpp"
#include "fnc/report.hpp"
#include "fnc/series_io.hpp"

namespace fnc::cli {

namespace {

using report::RunReport;
using Json = nlohmann::ordered_json;

struct Global {
  std::uint64_t seed = 0;
  int threads = 1;
  std::string output;
  std::string format = "text";
  bool no_timing = false;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::size_t packed_bytes(const BinaryImage& img) { return (img.size() + 7) / 8; }

BinaryImage read_image(const std::string& path) { return io::parse_pbm(io::read_file(path)); }

io::Container read_container_file(const std::string& path) { return io::read_container(io::read_file(path)); }

const std::string& require_output(const Global& g) {
  if (g.output.empty()) throw std::invalid_argument("--output is required for this command");
  return g.output;
}

// Writes the container and returns its size on disk.
std::size_t write_container_file(const std::string& path, const io::Container& c) {
  const io::Bytes bytes = io::write_container(c);
  io::write_file_atomic(path, bytes);
  return bytes.size();
}

void write_image(const std::string& path, const BinaryImage& img, const std::string& pbm) {
  io::write_file_atomic(path, io::write_pbm(img, pbm == "plain" ? io::PbmMode::plain : io::PbmMode::raw));
}

std::string render_reports(const Global& g, const std::vector<RunReport>& rows) {
  return g.format == "jsonl" ? report::format_jsonl(rows) : report::format_table(rows);
}

void finish(const Global& g, RunReport& r, const Stopwatch& clock, std::ostream& out) {
  r.seed = g.seed;
  r.wall_time = g.no_timing ? 0.0 : clock.seconds();
  out << render_reports(g, {r});
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------- options

struct IfsFlags {
  int maps = 3;
  double beta0 = 2000.0;
  double growth = 1.001;
  long sweeps = 1000;
  double step = 1.0 / 64.0;
  int chains = 1;
  int block_side = 0;
  std::string metric = "hamming";
  std::string preset;

  void add(CLI::App* c) {
    c->add_option("--maps", maps, "Maps per system")->check(CLI::PositiveNumber)->capture_default_str();
    c->add_option("--beta0", beta0, "Initial inverse temperature")->capture_default_str();
    c->add_option("--growth", growth, "Inverse temperature growth per sweep")->capture_default_str();
    c->add_option("--sweeps", sweeps, "Annealing sweeps")->capture_default_str();
    c->add_option("--step", step, "Grid step as a fraction of each coefficient range")->capture_default_str();
    c->add_option("--chains", chains, "Independent annealing chains")->check(CLI::PositiveNumber)->capture_default_str();
    c->add_option("--block-side", block_side, "Code each block separately (0 = whole image)")->capture_default_str();
    c->add_option("--metric", metric, "Search distance")->check(CLI::IsMember({"hamming", "hausdorff"}))->capture_default_str();
    c->add_option("--preset", preset, "Warm start from a known system")->check(CLI::IsMember({"sierpinski"}));
  }

  codec::IfsOptions options(const Global& g) const {
    codec::IfsOptions o;
    o.maps = maps;
    o.schedule.beta0 = beta0;
    o.schedule.growth = growth;
    o.schedule.sweeps = sweeps;
    o.schedule.step = step;
    o.schedule.seed = g.seed;
    o.chains = chains;
    o.threads = g.threads;
    o.block_side = block_side;
    o.metric = metric == "hausdorff" ? ifs::Metric::hausdorff : ifs::Metric::hamming;
    if (preset == "sierpinski") o.init = ifs::sierpinski().maps;
    return o;
  }

  Json echo() const {
    return Json{{"maps", maps},         {"beta0", beta0},   {"growth", growth},
                {"sweeps", sweeps},     {"step", step},     {"chains", chains},
                {"block_side", block_side}, {"metric", metric}, {"preset", preset}};
  }
};

struct AeFlags {
  int block_side = kDefaultBlockSide;
  int depth = 1;
  int iters = 300;
  std::optional<double> eta;
  double tau = 1000.0;
  bool per_block = false;
  bool bias = false;
  std::string codes = "f64";

  void add(CLI::App* c) {
    c->add_option("--block-side", block_side, "Block side b (M = b^2)")->check(CLI::PositiveNumber)->capture_default_str();
    c->add_option("--depth", depth, "Stacked stages")->check(CLI::PositiveNumber)->capture_default_str();
    c->add_option("--iters", iters, "Gradient steps per stage")->capture_default_str();
    c->add_option("--eta", eta, "Initial step size (default 1/Q)");
    c->add_option("--tau", tau, "Step decay constant")->capture_default_str();
    c->add_flag("--per-block", per_block, "Train one network per block");
    c->add_flag("--bias", bias, "Train bias terms");
    c->add_option("--codes", codes, "Code storage")->check(CLI::IsMember({"f64", "u8"}))->capture_default_str();
  }

  ae::AeConfig config(const Global& g, const BinaryImage& img) const {
    ae::AeConfig c;
    const auto q = static_cast<double>(tile(img, block_side).block_count());
    c.train.eta0 = eta ? *eta : (per_block ? 1.0 : 1.0 / q);
    c.train.decay_tau = tau;
    c.train.max_iters = iters;
    c.train.seed = g.seed;
    c.depth = depth;
    c.per_block = per_block;
    c.trainable_bias = bias;
    return c;
  }

  ae::CodeFormat format() const { return codes == "u8" ? ae::CodeFormat::u8 : ae::CodeFormat::f64; }

  Json echo(const ae::AeConfig& c) const {
    return Json{{"block_side", block_side}, {"depth", depth}, {"iters", iters}, {"eta", c.train.eta0},
                {"tau", tau},               {"per_block", per_block}, {"bias", bias}, {"codes", codes}};
  }
};

struct VqFlags {
  int block_side = codec::kDefaultVqBlockSide;
  int codewords = codec::kDefaultCodewords;
  long steps = 10000;
  double eta = 0.5;
  double tau = 0.0;
  int restarts = 1;

  void add(CLI::App* c) {
    c->add_option("--block-side", block_side, "Block side b (d = b^2)")->check(CLI::PositiveNumber)->capture_default_str();
    c->add_option("-m,--codewords", codewords, "Codebook size")->check(CLI::PositiveNumber)->capture_default_str();
    c->add_option("--steps", steps, "Online learning steps")->capture_default_str();
    c->add_option("--eta", eta, "Initial learning rate")->capture_default_str();
    c->add_option("--tau", tau, "Rate decay constant (0 = steps/10)")->capture_default_str();
    c->add_option("--restarts", restarts, "Independent training runs")->check(CLI::PositiveNumber)->capture_default_str();
  }

  codec::VqOptions options(const Global& g) const {
    codec::VqOptions o;
    o.block_side = block_side;
    o.codewords = codewords;
    o.schedule.eta0 = eta;
    o.schedule.tau = tau;
    o.schedule.max_steps = steps;
    o.schedule.seed = g.seed;
    o.restarts = restarts;
    o.threads = g.threads;
    return o;
  }

  Json echo() const {
    return Json{{"block_side", block_side}, {"codewords", codewords}, {"steps", steps},
                {"eta", eta},               {"tau", tau},             {"restarts", restarts}};
  }
};

// ---------------------------------------------------------------- runners

RunReport image_report(std::string method, const BinaryImage& original, std::size_t compressed,
                       const BinaryImage& decoded, Json config) {
  RunReport r;
  r.method = std::move(method);
  r.original_bytes = packed_bytes(original);
  r.compressed_bytes = compressed;
  r.distortion = ifs::hamming_distance(original, decoded);
  r.config = std::move(config);
  return r;
}

RunReport run_ifs(const Global& g, const IfsFlags& f, const BinaryImage& img, const std::string& path) {
  const auto enc = codec::encode_ifs(img, f.options(g));
  const std::size_t size = path.empty() ? io::write_container(enc.container).size()
                                        : write_container_file(path, enc.container);
  Json cfg = f.echo();
  cfg["collage_delta"] = enc.collage_delta;
  return image_report("ifs", img, size, codec::decode_ifs(enc.container), std::move(cfg));
}

RunReport run_ae(const Global& g, const AeFlags& f, const BinaryImage& img, const std::string& path,
                 const std::optional<ae::Model>& trained = std::nullopt) {
  const auto cfg = f.config(g, img);
  const ae::Model model = trained ? codec::reencode(*trained, img) : ae::train_model(img, f.block_side, cfg);
  const auto c = codec::ae_container(model, f.format());
  const std::size_t size = path.empty() ? io::write_container(c).size() : write_container_file(path, c);
  const auto acc = ae::account(model, f.format());
  Json echo = f.echo(cfg);
  echo["code_bytes"] = acc.code_bytes;
  echo["weight_bytes"] = acc.weight_bytes;
  echo["not_smaller"] = acc.not_smaller();
  return image_report("ae", img, size, codec::decode_ae(c), std::move(echo));
}

RunReport run_vq(const Global& g, const VqFlags& f, const BinaryImage& img, const std::string& path,
                 const std::optional<std::pair<vq::Codebook<double>, int>>& book = std::nullopt) {
  Json echo = f.echo();
  vq::Codebook<double> w;
  int b = f.block_side;
  if (book) {
    std::tie(w, b) = *book;
    echo["block_side"] = b;
    echo["codewords"] = w.cols();
  } else {
    const auto r = codec::train_vq(img, f.options(g));
    w = r.codebook;
    echo["train_distortion"] = r.distortion;
  }
  const auto c = codec::encode_vq(img, w, b, g.seed);
  const std::size_t size = path.empty() ? io::write_container(c).size() : write_container_file(path, c);
  return image_report("vq", img, size, codec::decode_vq(c), std::move(echo));
}

std::pair<vq::Codebook<double>, int> read_codebook(const std::string& path) {
  const auto c = read_container_file(path);
  if (c.method != io::Method::vq) throw FormatError("codebook file is not a VQ container");
  return {codec::read_vq_payload(c.payload).codebook, c.block_side};
}

std::vector<double> read_series(const std::string& path, bool skip_header) {
  const io::Bytes raw = io::read_file(path);
  return io::parse_series_csv(std::string_view(reinterpret_cast<const char*>(raw.data()), raw.size()), skip_header);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fractal and neural codecs for binary images and scalar series", "fnc"};
  app.require_subcommand(1);
  Global g;
  app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("-o,--output", g.output, "Output file");
  app.add_option("--format", g.format, "Report format")->check(CLI::IsMember({"text", "jsonl"}))->capture_default_str();
  app.add_flag("--no-timing", g.no_timing, "Report wall_time as 0");

  std::vector<std::pair<CLI::App*, std::function<void()>>> actions;
  auto group = [&](const char* name, const char* help) {
    auto* s = app.add_subcommand(name, help);
    s->require_subcommand(1);
    s->fallthrough();
    return s;
  };
  auto command = [&](CLI::App* parent, const char* name, const char* help, std::function<void()> fn) {
    auto* c = parent->add_subcommand(name, help);
    c->fallthrough();
    actions.emplace_back(c, std::move(fn));
    return c;
  };

  std::string input, second, pbm = "raw";

  // ifs
  auto* ifs_cmd = group("ifs", "Iterated function system coding");
  IfsFlags ifs_flags;
  auto* ifs_encode = command(ifs_cmd, "encode", "Search IFS coefficients for an image", [&] {
    Stopwatch clock;
    const BinaryImage img = read_image(input);
    auto r = run_ifs(g, ifs_flags, img, require_output(g));
    finish(g, r, clock, out);
  });
  ifs_encode->add_option("input", input, "Input PBM/PGM")->required();
  ifs_flags.add(ifs_encode);

  int decode_iterations = 64;
  auto* ifs_decode = command(ifs_cmd, "decode", "Render the attractor stored in a container", [&] {
    const BinaryImage img = codec::decode_ifs(read_container_file(input), decode_iterations);
    write_image(require_output(g), img, pbm);
  });
  ifs_decode->add_option("input", input, "Input container")->required();
  ifs_decode->add_option("--iterations", decode_iterations, "Maximum set iterations")->capture_default_str();
  ifs_decode->add_option("--pbm", pbm, "PBM flavour")->check(CLI::IsMember({"raw", "plain"}))->capture_default_str();

  std::string render_preset;
  int render_size = 256;
  long render_iterations = 0;
  auto* ifs_render = command(ifs_cmd, "render", "Render an IFS attractor", [&] {
    std::vector<ifs::Map> maps;
    if (!render_preset.empty()) {
      maps = ifs::sierpinski().maps;
    } else if (!input.empty()) {
      maps = codec::ifs_systems(read_container_file(input)).front();
    } else {
      throw std::invalid_argument("give a container file or --preset");
    }
    if (maps.empty()) throw DataError("container holds no maps");
    if (render_size < 1) throw std::invalid_argument("--size must be positive");
    const auto sys = ifs::validate_ifs(maps);
    const BinaryImage img =
        render_iterations > 0
            ? ifs::chaos_game(sys, render_iterations, std::min<long>(100, render_iterations - 1), ifs::Viewport{},
                              render_size, render_size, g.seed)
            : ifs::render_attractor(sys, ifs::Viewport{}, render_size, render_size);
    write_image(require_output(g), img, pbm);
  });
  ifs_render->add_option("input", input, "Container whose first system is drawn");
  ifs_render->add_option("--preset", render_preset, "Built-in system")->check(CLI::IsMember({"sierpinski"}));
  ifs_render->add_option("--size", render_size, "Raster side in pixels")->capture_default_str();
  ifs_render->add_option("--iterations", render_iterations, "Chaos game iterations (0 = set iteration)")
      ->capture_default_str();
  ifs_render->add_option("--pbm", pbm, "PBM flavour")->check(CLI::IsMember({"raw", "plain"}))->capture_default_str();

  // ae
  auto* ae_cmd = group("ae", "Block autoencoder coding");
  AeFlags ae_flags;
  auto* ae_train = command(ae_cmd, "train", "Train a model on an image and store it with its codes", [&] {
    Stopwatch clock;
    auto r = run_ae(g, ae_flags, read_image(input), require_output(g));
    finish(g, r, clock, out);
  });
  ae_train->add_option("input", input, "Input PBM/PGM")->required();
  ae_flags.add(ae_train);

  std::string ae_model;
  auto* ae_encode = command(ae_cmd, "encode", "Encode an image, training unless --model is given", [&] {
    Stopwatch clock;
    std::optional<ae::Model> trained;
    if (!ae_model.empty()) trained = codec::read_ae(read_container_file(ae_model));
    auto r = run_ae(g, ae_flags, read_image(input), require_output(g), trained);
    finish(g, r, clock, out);
  });
  ae_encode->add_option("input", input, "Input PBM/PGM")->required();
  ae_encode->add_option("--model", ae_model, "Trained model container");
  ae_flags.add(ae_encode);

  auto* ae_decode = command(ae_cmd, "decode", "Reconstruct an image from a container", [&] {
    write_image(require_output(g), codec::decode_ae(read_container_file(input)), pbm);
  });
  ae_decode->add_option("input", input, "Input container")->required();
  ae_decode->add_option("--pbm", pbm, "PBM flavour")->check(CLI::IsMember({"raw", "plain"}))->capture_default_str();

  auto* ae_report = command(ae_cmd, "report", "Byte accounting of a container against its source image", [&] {
    Stopwatch clock;
    const io::Bytes bytes = io::read_file(input);
    const auto c = io::read_container(bytes);
    const ae::Model model = codec::read_ae(c);
    const BinaryImage img = read_image(second);
    const auto format = c.payload.at(0) == 1 ? ae::CodeFormat::u8 : ae::CodeFormat::f64;
    const auto acc = ae::account(model, format);
    Json echo{{"block_side", model.block_side}, {"depth", model.depth},         {"per_block", model.per_block},
              {"bias", model.trainable_bias},   {"code_bytes", acc.code_bytes}, {"weight_bytes", acc.weight_bytes},
              {"header_bytes", acc.header_bytes}, {"not_smaller", acc.not_smaller()}};
    auto r = image_report("ae", img, bytes.size(), model.reconstruct_image(), std::move(echo));
    finish(g, r, clock, out);
  });
  ae_report->add_option("container", input, "AE container")->required();
  ae_report->add_option("image", second, "Source image")->required();

  // vq
  auto* vq_cmd = group("vq", "Vector quantization coding");
  VqFlags vq_flags;
  auto* vq_train = command(vq_cmd, "train", "Train a codebook on the blocks of an image", [&] {
    Stopwatch clock;
    const BinaryImage img = read_image(input);
    const auto result = codec::train_vq(img, vq_flags.options(g));
    const std::size_t size =
        write_container_file(require_output(g), codec::vq_codebook_container(result.codebook, vq_flags.block_side));
    Json echo = vq_flags.echo();
    echo["train_distortion"] = result.distortion;
    echo["train_seed"] = result.seed;
    const auto coded = codec::encode_vq(img, result.codebook, vq_flags.block_side, g.seed);
    auto r = image_report("vq", img, size, codec::decode_vq(coded), std::move(echo));
    finish(g, r, clock, out);
  });
  vq_train->add_option("input", input, "Input PBM/PGM")->required();
  vq_flags.add(vq_train);

  std::string vq_codebook;
  auto* vq_encode = command(vq_cmd, "encode", "Quantize an image, training unless --codebook is given", [&] {
    Stopwatch clock;
    std::optional<std::pair<vq::Codebook<double>, int>> book;
    if (!vq_codebook.empty()) book = read_codebook(vq_codebook);
    auto r = run_vq(g, vq_flags, read_image(input), require_output(g), book);
    finish(g, r, clock, out);
  });
  vq_encode->add_option("input", input, "Input PBM/PGM")->required();
  vq_encode->add_option("--codebook", vq_codebook, "Codebook container from vq train");
  vq_flags.add(vq_encode);

  auto* vq_decode = command(vq_cmd, "decode", "Reconstruct an image from a container", [&] {
    write_image(require_output(g), codec::decode_vq(read_container_file(input)), pbm);
  });
  vq_decode->add_option("input", input, "Input container")->required();
  vq_decode->add_option("--pbm", pbm, "PBM flavour")->check(CLI::IsMember({"raw", "plain"}))->capture_default_str();

  auto* vq_report = command(vq_cmd, "report", "Size and distortion of a container against its source image", [&] {
    Stopwatch clock;
    const io::Bytes bytes = io::read_file(input);
    const auto c = io::read_container(bytes);
    const auto p = codec::read_vq_payload(c.payload);
    Json echo{{"block_side", c.block_side},
              {"codewords", p.codebook.cols()},
              {"index_bits", vq::index_bits(static_cast<std::size_t>(p.codebook.cols()))},
              {"codebook_bytes", p.codebook.size() * 8}};
    auto r = image_report("vq", read_image(second), bytes.size(), codec::decode_vq(c), std::move(echo));
    finish(g, r, clock, out);
  });
  vq_report->add_option("container", input, "VQ container")->required();
  vq_report->add_option("image", second, "Source image")->required();

  // ts
  auto* ts_cmd = group("ts", "Scalar series reconstruction");
  std::string ts_method = "hertz", ts_mode = "linear";
  std::size_t min_count = series::kDefaultMinCount;
  std::optional<int> ts_iters;
  std::optional<double> ts_eta;
  std::optional<double> ts_tau;
  int hidden = 16, dim = 0;
  bool skip_header = false, anneal = false, no_bias = false;
  double mc_beta0 = 1.0, mc_growth = 1.0, mc_scale = 0.05;
  auto* ts_fit = command(ts_cmd, "fit", "Fit a model of the generating map", [&] {
    Stopwatch clock;
    const auto samples = read_series(input, skip_header);
    codec::SeriesOptions o;
    o.kind = ts_method == "net" ? codec::SeriesKind::net : codec::SeriesKind::hertz;
    o.mode = ts_mode == "constant" ? series::ModelMode::constant : series::ModelMode::linear;
    o.min_count = min_count;
    o.train.seed = g.seed;
    const bool net = o.kind == codec::SeriesKind::net;
    o.train.decay_tau = ts_tau ? *ts_tau : (net ? 20000.0 : 1000.0);
    o.train.max_iters = ts_iters ? *ts_iters : (net ? 20000 : 1000);
    if (net) o.train.eta0 = 20.0 / static_cast<double>(std::max<std::size_t>(samples.size(), 2) - 1);
    if (ts_eta) {
      o.train.eta0 = *ts_eta;
      o.auto_step = false;
    }
    if (anneal) {
      o.train.method = TrainMethod::monte_carlo;
      o.train.beta0 = mc_beta0;
      o.train.beta_growth = mc_growth;
      o.train.proposal_scale = mc_scale;
    }
    o.hidden = hidden;
    o.dim = dim;
    o.bias = !no_bias;
    const auto m = codec::fit_series(samples, o);
    const std::size_t size = write_container_file(require_output(g), codec::series_container(m));
    Json j{{"method", ts_method},
           {"samples", samples.size()},
           {"model_bytes", size},
           {"dim", m.dim()},
           {"blocks", m.kind == codec::SeriesKind::hertz ? m.hertz.partition.size() : 0},
           {"hidden", m.kind == codec::SeriesKind::net ? m.net.hidden_dim() : 0},
           {"rmse", m.rmse},
           {"max_residual", m.max_residual},
           {"wall_time", g.no_timing ? 0.0 : clock.seconds()},
           {"seed", g.seed}};
    if (g.format == "jsonl") {
      out << j.dump() << '\n';
    } else {
      for (auto it = j.begin(); it != j.end(); ++it)
        out << it.key() << ' ' << (it->is_string() ? it->get<std::string>() : it->dump()) << '\n';
    }
  });
  ts_fit->add_option("input", input, "Series CSV")->required();
  ts_fit->add_option("--method", ts_method, "Model family")->check(CLI::IsMember({"hertz", "net"}))->capture_default_str();
  ts_fit->add_option("--mode", ts_mode, "Hertz approximant")->check(CLI::IsMember({"constant", "linear"}))->capture_default_str();
  ts_fit->add_option("--min-count", min_count, "Minimum points per partition block")->capture_default_str();
  ts_fit->add_option("--iters", ts_iters, "Training iterations (hertz 1000, net 20000)");
  ts_fit->add_option("--eta", ts_eta, "Initial step size (hertz: stable step, net: 20/n)");
  ts_fit->add_option("--tau", ts_tau, "Step decay constant (hertz 1000, net 20000)");
  ts_fit->add_option("--hidden", hidden, "Hidden units of the net")->check(CLI::PositiveNumber)->capture_default_str();
  ts_fit->add_option("--dim", dim, "Block length d for the net (0 = estimate)")->capture_default_str();
  ts_fit->add_flag("--no-bias", no_bias, "Net without bias terms");
  ts_fit->add_flag("--anneal", anneal, "Monte Carlo training instead of gradient descent");
  ts_fit->add_option("--mc-beta0", mc_beta0, "Monte Carlo initial inverse temperature")->capture_default_str();
  ts_fit->add_option("--mc-growth", mc_growth, "Monte Carlo inverse temperature growth")->capture_default_str();
  ts_fit->add_option("--mc-scale", mc_scale, "Monte Carlo proposal deviation")->capture_default_str();
  ts_fit->add_flag("--skip-header", skip_header, "Drop the first CSV line");

  auto* ts_predict = command(ts_cmd, "predict", "One-step predictions from a fitted model", [&] {
    const auto model = codec::read_series(read_container_file(input));
    const auto samples = read_series(second, skip_header);
    const auto rows = codec::predict_series(model, samples);
    std::string csv = "index,prediction,actual\n";
    double worst = 0.0;
    for (const auto& p : rows) {
      csv += std::to_string(p.index) + ',' + fmt(p.value) + ',';
      if (p.actual) {
        csv += fmt(*p.actual);
        worst = std::max(worst, std::abs(*p.actual - p.value));
      }
      csv += '\n';
    }
    io::write_text_atomic(require_output(g), csv);
    Json j{{"predictions", rows.size()}, {"max_error", worst}, {"model_max_residual", model.max_residual}};
    if (g.format == "jsonl") {
      out << j.dump() << '\n';
    } else {
      for (auto it = j.begin(); it != j.end(); ++it) out << it.key() << ' ' << it->dump() << '\n';
    }
  });
  ts_predict->add_option("model", input, "Model container from ts fit")->required();
  ts_predict->add_option("input", second, "Series CSV")->required();
  ts_predict->add_flag("--skip-header", skip_header, "Drop the first CSV line");

  // bench
  auto* bench_cmd = group("bench", "Codec comparison");
  IfsFlags bench_ifs;
  AeFlags bench_ae;
  VqFlags bench_vq;
  std::string artifacts;
  auto* compare = command(bench_cmd, "compare", "Run the IFS, AE and VQ codecs on one image", [&] {
    const BinaryImage img = read_image(input);
    if (!artifacts.empty()) std::filesystem::create_directories(artifacts);
    auto artifact = [&](const char* name) { return artifacts.empty() ? std::string() : artifacts + "/" + name; };
    std::vector<RunReport> rows;
    auto timed = [&](auto&& fn) {
      Stopwatch clock;
      RunReport r = fn();
      r.seed = g.seed;
      r.wall_time = g.no_timing ? 0.0 : clock.seconds();
      rows.push_back(std::move(r));
    };
    timed([&] { return run_ifs(g, bench_ifs, img, artifact("ifs.fnc")); });
    timed([&] { return run_ae(g, bench_ae, img, artifact("ae.fnc")); });
    timed([&] { return run_vq(g, bench_vq, img, artifact("vq.fnc")); });
    const std::string text = render_reports(g, rows);
    if (g.output.empty()) {
      out << text;
    } else {
      io::write_text_atomic(g.output, text);
    }
  });
  compare->add_option("input", input, "Input PBM/PGM")->required();
  compare->add_option("--artifacts", artifacts, "Directory for the three containers");
  compare->add_option("--maps", bench_ifs.maps, "IFS maps")->capture_default_str();
  compare->add_option("--sweeps", bench_ifs.sweeps, "IFS annealing sweeps")->capture_default_str();
  compare->add_option("--chains", bench_ifs.chains, "IFS chains")->capture_default_str();
  compare->add_option("--preset", bench_ifs.preset, "IFS warm start")->check(CLI::IsMember({"sierpinski"}));
  compare->add_option("--ae-block-side", bench_ae.block_side, "AE block side")->capture_default_str();
  compare->add_option("--ae-iters", bench_ae.iters, "AE gradient steps")->capture_default_str();
  compare->add_option("--vq-block-side", bench_vq.block_side, "VQ block side")->capture_default_str();
  compare->add_option("-m,--codewords", bench_vq.codewords, "VQ codebook size")->capture_default_str();
  compare->add_option("--vq-steps", bench_vq.steps, "VQ learning steps")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 1;
  }

  try {
    for (auto& [cmd, fn] : actions)
      if (cmd->parsed()) fn();
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace fnc::cli
