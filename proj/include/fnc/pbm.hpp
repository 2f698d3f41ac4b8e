#pragma once

#include <cstdint>
#include <span>

#include "fnc/binary_image.hpp"
#include "fnc/bytes.hpp"

namespace fnc::io {

enum class PbmMode { plain, raw };  // P1, P4

/// Parses P1/P4 bitmaps and P2/P5 graymaps. Gray samples darker than
/// `gray_threshold * maxval` become 1 (black), matching the PBM convention.
BinaryImage parse_pbm(std::span<const std::uint8_t> bytes, double gray_threshold = 0.5);

Bytes write_pbm(const BinaryImage& image, PbmMode mode);

}  // namespace fnc::io
