#include "fnc/blocks.hpp"

#include <stdexcept>

#include "fnc/error.hpp"

namespace fnc {

BlockTiling tile(const BinaryImage& image, int block_side) {
  if (block_side < 1) throw std::invalid_argument("block side must be at least 1");
  if (image.empty()) throw DataError("cannot tile an empty image");
  BlockTiling t;
  t.block_side = block_side;
  t.width = image.width();
  t.height = image.height();
  t.grid_cols = (t.width + block_side - 1) / block_side;
  t.grid_rows = (t.height + block_side - 1) / block_side;
  t.blocks = Eigen::MatrixXd::Zero(t.block_length(), t.block_count());
  for (int y = 0; y < t.height; ++y)
    for (int x = 0; x < t.width; ++x) {
      if (!image(x, y)) continue;
      const int q = (y / block_side) * t.grid_cols + x / block_side;
      const int l = (y % block_side) * block_side + x % block_side;
      t.blocks(l, q) = 1.0;
    }
  return t;
}

BinaryImage untile(const Eigen::MatrixXd& blocks, int block_side, int width, int height) {
  if (block_side < 1 || width < 1 || height < 1) throw std::invalid_argument("bad tiling geometry");
  const int cols = (width + block_side - 1) / block_side;
  const int rows = (height + block_side - 1) / block_side;
  if (blocks.rows() != static_cast<Eigen::Index>(block_side) * block_side || blocks.cols() != cols * rows)
    throw DimensionMismatch("block matrix does not match the tiling geometry");
  BinaryImage img(width, height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const int q = (y / block_side) * cols + x / block_side;
      const int l = (y % block_side) * block_side + x % block_side;
      img.set(x, y, blocks(l, q) > 0.5);
    }
  return img;
}

Eigen::MatrixXd binarize(const Eigen::MatrixXd& x) { return (x.array() > 0.5).cast<double>().matrix(); }

}  // namespace fnc
