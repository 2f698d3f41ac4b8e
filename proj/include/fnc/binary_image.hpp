#pragma once

#include <cstddef>
#include <cstdint>

#include <Eigen/Core>

namespace fnc {

/// Row-major lattice of {0,1} pixels; pixel (x, y) lives at row y, column x.
class BinaryImage {
 public:
  using Pixels = Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  BinaryImage() = default;
  BinaryImage(int width, int height);
  explicit BinaryImage(Pixels pixels);

  int width() const { return static_cast<int>(pixels_.cols()); }
  int height() const { return static_cast<int>(pixels_.rows()); }
  std::size_t size() const { return static_cast<std::size_t>(pixels_.size()); }
  bool empty() const { return pixels_.size() == 0; }

  bool operator()(int x, int y) const { return pixels_(y, x) != 0; }
  void set(int x, int y, bool on = true) { pixels_(y, x) = on ? 1 : 0; }

  const Pixels& pixels() const { return pixels_; }
  Pixels& pixels() { return pixels_; }

  std::size_t count() const;
  BinaryImage complement() const;
  void clear() { pixels_.setZero(); }

  friend bool operator==(const BinaryImage& a, const BinaryImage& b) {
    return a.pixels_.rows() == b.pixels_.rows() && a.pixels_.cols() == b.pixels_.cols() &&
           (a.pixels_ == b.pixels_).all();
  }

 private:
  Pixels pixels_;
};

}  // namespace fnc
