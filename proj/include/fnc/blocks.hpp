#pragma once

// Square-block views of binary images shared by the block codecs.

#include <Eigen/Core>

#include "fnc/binary_image.hpp"

namespace fnc {

inline constexpr int kDefaultBlockSide = 20;

struct BlockTiling {
  int block_side = kDefaultBlockSide;
  int width = 0;   // original image
  int height = 0;
  int grid_cols = 0;
  int grid_rows = 0;
  Eigen::MatrixXd blocks;  // M x Q, one block per column in row-major block order

  int block_length() const { return block_side * block_side; }
  int block_count() const { return grid_cols * grid_rows; }
  int pad_right() const { return grid_cols * block_side - width; }
  int pad_bottom() const { return grid_rows * block_side - height; }
};

/// Zero-pads the image to whole blocks.
BlockTiling tile(const BinaryImage& image, int block_side);

/// Writes the blocks back, binarizing at > 0.5, and crops the padding.
BinaryImage untile(const Eigen::MatrixXd& blocks, int block_side, int width, int height);
inline BinaryImage untile(const BlockTiling& t) { return untile(t.blocks, t.block_side, t.width, t.height); }

/// 1 where x > 0.5; exact ties go to 0.
Eigen::MatrixXd binarize(const Eigen::MatrixXd& x);

}  // namespace fnc
