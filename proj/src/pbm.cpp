#include "fnc/pbm.hpp"

#include <cctype>
#include <string>

#include "fnc/error.hpp"

namespace fnc::io {

namespace {

constexpr std::uint64_t kMaxSide = 1u << 16;
constexpr std::uint64_t kMaxPixels = 1u << 28;

class Scanner {
 public:
  explicit Scanner(std::span<const std::uint8_t> data) : data_(data) {}

  void skip_space_and_comments() {
    while (pos_ < data_.size()) {
      const char c = static_cast<char>(data_[pos_]);
      if (c == '#') {
        while (pos_ < data_.size() && data_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        return;
      }
    }
  }

  std::uint64_t number(const char* what) {
    skip_space_and_comments();
    if (pos_ >= data_.size() || !std::isdigit(data_[pos_])) throw FormatError(std::string("pbm: expected ") + what);
    std::uint64_t v = 0;
    while (pos_ < data_.size() && std::isdigit(data_[pos_])) {
      v = v * 10 + (data_[pos_++] - '0');
      if (v > kMaxPixels) throw FormatError(std::string("pbm: ") + what + " too large");
    }
    return v;
  }

  // Plain rasters: one '0' or '1' per pixel, whitespace optional.
  bool bit() {
    skip_space_and_comments();
    if (pos_ >= data_.size()) throw FormatError("pbm: truncated raster");
    const char c = static_cast<char>(data_[pos_++]);
    if (c != '0' && c != '1') throw FormatError("pbm: invalid raster character");
    return c == '1';
  }

  // Raw rasters start after exactly one whitespace byte.
  std::span<const std::uint8_t> raw(std::size_t n) {
    if (pos_ >= data_.size() || !std::isspace(data_[pos_])) throw FormatError("pbm: missing raster separator");
    ++pos_;
    if (data_.size() - pos_ < n) throw FormatError("pbm: truncated raster");
    auto out = data_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

 private:
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

}  // namespace

BinaryImage parse_pbm(std::span<const std::uint8_t> bytes, double gray_threshold) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] < '1' || bytes[1] > '5' || bytes[1] == '3') {
    throw FormatError("pbm: unsupported magic (expected P1, P2, P4 or P5)");
  }
  const char kind = static_cast<char>(bytes[1]);
  Scanner s(bytes.subspan(2));
  const std::uint64_t w = s.number("width");
  const std::uint64_t h = s.number("height");
  if (w == 0 || h == 0 || w > kMaxSide || h > kMaxSide || w * h > kMaxPixels) throw FormatError("pbm: bad dimensions");

  std::uint64_t maxval = 1;
  if (kind == '2' || kind == '5') {
    maxval = s.number("maxval");
    if (maxval == 0 || maxval > 65535) throw FormatError("pbm: maxval out of range");
  }
  const double cut = gray_threshold * static_cast<double>(maxval);

  BinaryImage img(static_cast<int>(w), static_cast<int>(h));
  const int W = img.width();
  const int H = img.height();
  switch (kind) {
    case '1':
      for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) img.set(x, y, s.bit());
      break;
    case '2':
      for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
          const auto v = s.number("sample");
          if (v > maxval) throw FormatError("pbm: sample exceeds maxval");
          img.set(x, y, static_cast<double>(v) < cut);
        }
      break;
    case '4': {
      const std::size_t row_bytes = (W + 7) / 8;
      auto raster = s.raw(row_bytes * H);
      for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) img.set(x, y, (raster[y * row_bytes + x / 8] >> (7 - x % 8)) & 1);
      break;
    }
    case '5': {
      const std::size_t sample = maxval > 255 ? 2 : 1;
      auto raster = s.raw(sample * W * H);
      for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
          const std::size_t at = sample * (static_cast<std::size_t>(y) * W + x);
          const unsigned v = sample == 2 ? (raster[at] << 8) | raster[at + 1] : raster[at];
          if (v > maxval) throw FormatError("pbm: sample exceeds maxval");
          img.set(x, y, static_cast<double>(v) < cut);
        }
      break;
    }
  }
  return img;
}

Bytes write_pbm(const BinaryImage& image, PbmMode mode) {
  const int W = image.width();
  const int H = image.height();
  std::string head = std::string(mode == PbmMode::plain ? "P1" : "P4") + "\n" + std::to_string(W) + " " +
                     std::to_string(H) + "\n";
  Bytes out(head.begin(), head.end());
  if (mode == PbmMode::plain) {
    for (int y = 0; y < H; ++y) {
      for (int x = 0; x < W; ++x) {
        out.push_back(image(x, y) ? '1' : '0');
        // Keep lines under 70 characters.
        out.push_back((x + 1) % 35 == 0 || x + 1 == W ? '\n' : ' ');
      }
    }
  } else {
    const std::size_t row_bytes = (W + 7) / 8;
    for (int y = 0; y < H; ++y) {
      const std::size_t base = out.size();
      out.resize(base + row_bytes, 0);
      for (int x = 0; x < W; ++x)
        if (image(x, y)) out[base + x / 8] |= static_cast<std::uint8_t>(0x80 >> (x % 8));
    }
  }
  return out;
}

}  // namespace fnc::io
