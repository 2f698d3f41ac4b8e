#include "fnc/binary_image.hpp"

#include <stdexcept>

namespace fnc {

BinaryImage::BinaryImage(int width, int height) {
  if (width < 0 || height < 0) throw std::invalid_argument("image dimensions must be non-negative");
  pixels_ = Pixels::Zero(height, width);
}

BinaryImage::BinaryImage(Pixels pixels) : pixels_(std::move(pixels)) {
  if (((pixels_ != 0) && (pixels_ != 1)).any()) throw std::invalid_argument("binary image pixels must be 0 or 1");
}

std::size_t BinaryImage::count() const { return static_cast<std::size_t>((pixels_ != 0).count()); }

BinaryImage BinaryImage::complement() const { return BinaryImage(Pixels(1 - pixels_)); }

}  // namespace fnc
