#pragma once

#include <cmath>

#include "rpg/linalg.hpp"
#include "rpg/rng.hpp"

namespace rpg::test {

inline Vector random_vector(RngStream& rng, int n, double lo = -1.0, double hi = 1.0) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.uniform(lo, hi);
  return v;
}

inline Matrix random_matrix(RngStream& rng, int rows, int cols) {
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = rng.normal();
  return m;
}

inline Matrix random_antisymmetric(RngStream& rng, int n) {
  const Matrix b = random_matrix(rng, n, n);
  return 0.5 * (b - b.transpose());
}

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(1e-300, std::abs(want));
}

}  // namespace rpg::test
