#pragma once

#include <cstdint>
#include <span>
#include <string_view>

#include "fnc/bytes.hpp"

namespace fnc::io {

enum class Method : std::uint8_t { ifs = 0, ae = 1, vq = 2, net = 3 };

std::string_view method_name(Method m);

inline constexpr std::uint8_t kContainerVersion = 1;
// magic(4) version(1) method(1) width(4) height(4) block_side(2) pad_right(2) pad_bottom(2) payload_len(8)
inline constexpr std::size_t kContainerHeaderBytes = 28;

/// FNC1 file: fixed little-endian header followed by a method-specific payload.
struct Container {
  Method method = Method::ifs;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint16_t block_side = 0;
  std::uint16_t pad_right = 0;
  std::uint16_t pad_bottom = 0;
  Bytes payload;

  friend bool operator==(const Container&, const Container&) = default;
};

Bytes write_container(const Container& c);
Container read_container(std::span<const std::uint8_t> bytes);

}  // namespace fnc::io
