#include "fnc/container.hpp"

#include <string>

#include "fnc/error.hpp"

namespace fnc::io {

namespace {
constexpr std::uint8_t kMagic[4] = {'F', 'N', 'C', '1'};
}

std::string_view method_name(Method m) {
  switch (m) {
    case Method::ifs: return "IFS";
    case Method::ae: return "AE";
    case Method::vq: return "VQ";
    case Method::net: return "NET";
  }
  return "?";
}

Bytes write_container(const Container& c) {
  ByteWriter w;
  w.bytes(kMagic);
  w.u8(kContainerVersion);
  w.u8(static_cast<std::uint8_t>(c.method));
  w.u32(c.width);
  w.u32(c.height);
  w.u16(c.block_side);
  w.u16(c.pad_right);
  w.u16(c.pad_bottom);
  w.u64(c.payload.size());
  w.bytes(c.payload);
  return w.take();
}

Container read_container(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  if (bytes.size() < 4 || !std::equal(kMagic, kMagic + 4, bytes.begin())) throw FormatError("not an FNC1 container");
  r.bytes(4);
  const std::uint8_t version = r.u8();
  if (version != kContainerVersion) throw FormatError("unsupported container version " + std::to_string(version));
  const std::uint8_t method = r.u8();
  if (method > static_cast<std::uint8_t>(Method::net)) throw FormatError("unknown method tag " + std::to_string(method));
  Container c;
  c.method = static_cast<Method>(method);
  c.width = r.u32();
  c.height = r.u32();
  c.block_side = r.u16();
  c.pad_right = r.u16();
  c.pad_bottom = r.u16();
  const std::uint64_t len = r.u64();
  if (len != r.remaining()) {
    throw FormatError("payload length mismatch: header says " + std::to_string(len) + ", found " +
                      std::to_string(r.remaining()));
  }
  auto payload = r.bytes(static_cast<std::size_t>(len));
  c.payload.assign(payload.begin(), payload.end());
  return c;
}

}  // namespace fnc::io
