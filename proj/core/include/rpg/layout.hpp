#pragma once

#include <string>
#include <vector>

#include "rpg/linalg.hpp"

namespace rpg {

enum class SegmentKind { matrix, vector };

struct Segment {
  std::string name;
  SegmentKind kind = SegmentKind::vector;
  int rows = 0;
  int cols = 1;  // always 1 for vectors
  bool pool_exempt = false;
  int offset = 0;

  int size() const { return rows * cols; }
};

/// Ordered weight/bias blocks of a flat parameter vector. Matrices are stored
/// row-major.
class LayerLayout {
 public:
  LayerLayout() = default;

  LayerLayout& add_matrix(std::string name, int rows, int cols);
  LayerLayout& add_vector(std::string name, int length, bool pool_exempt = false);

  /// A layout made of one plain vector segment.
  static LayerLayout single_vector(int n);

  const std::vector<Segment>& segments() const { return segments_; }
  int dim() const { return dim_; }

  /// One matrix per segment (vectors as length x 1).
  std::vector<Matrix> unflatten(const Vector& theta) const;
  Vector flatten(const std::vector<Matrix>& blocks) const;

  bool operator==(const LayerLayout& other) const;

 private:
  std::vector<Segment> segments_;
  int dim_ = 0;
};

}  // namespace rpg
