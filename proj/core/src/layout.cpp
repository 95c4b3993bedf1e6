#include "rpg/layout.hpp"

#include <string>
#include <utility>

#include "rpg/error.hpp"

namespace rpg {

LayerLayout& LayerLayout::add_matrix(std::string name, int rows, int cols) {
  if (rows < 1 || cols < 1) throw BadDimensions("layout: matrix segment '" + name + "' is empty");
  segments_.push_back({std::move(name), SegmentKind::matrix, rows, cols, false, dim_});
  dim_ += rows * cols;
  return *this;
}

LayerLayout& LayerLayout::add_vector(std::string name, int length, bool pool_exempt) {
  if (length < 1) throw BadDimensions("layout: vector segment '" + name + "' is empty");
  segments_.push_back({std::move(name), SegmentKind::vector, length, 1, pool_exempt, dim_});
  dim_ += length;
  return *this;
}

LayerLayout LayerLayout::single_vector(int n) {
  LayerLayout layout;
  layout.add_vector("theta", n);
  return layout;
}

std::vector<Matrix> LayerLayout::unflatten(const Vector& theta) const {
  if (theta.size() != dim_) {
    throw LayoutMismatch("layout: expected " + std::to_string(dim_) + " parameters, got " +
                         std::to_string(theta.size()));
  }
  std::vector<Matrix> blocks;
  blocks.reserve(segments_.size());
  for (const Segment& s : segments_) {
    Matrix m(s.rows, s.cols);
    for (int r = 0; r < s.rows; ++r) {
      for (int c = 0; c < s.cols; ++c) m(r, c) = theta(s.offset + r * s.cols + c);
    }
    blocks.push_back(std::move(m));
  }
  return blocks;
}

Vector LayerLayout::flatten(const std::vector<Matrix>& blocks) const {
  if (blocks.size() != segments_.size()) throw LayoutMismatch("layout: wrong number of blocks");
  Vector theta(dim_);
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const Segment& s = segments_[i];
    if (blocks[i].rows() != s.rows || blocks[i].cols() != s.cols) {
      throw LayoutMismatch("layout: block '" + s.name + "' has the wrong shape");
    }
    for (int r = 0; r < s.rows; ++r) {
      for (int c = 0; c < s.cols; ++c) theta(s.offset + r * s.cols + c) = blocks[i](r, c);
    }
  }
  return theta;
}

bool LayerLayout::operator==(const LayerLayout& other) const {
  if (dim_ != other.dim_ || segments_.size() != other.segments_.size()) return false;
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const Segment& a = segments_[i];
    const Segment& b = other.segments_[i];
    if (a.kind != b.kind || a.rows != b.rows || a.cols != b.cols ||
        a.pool_exempt != b.pool_exempt || a.name != b.name) {
      return false;
    }
  }
  return true;
}

}  // namespace rpg
