#pragma once

// Rank-one metric G = I + u u^T. Everything except metric_matrix is O(n).

#include <optional>
#include <span>
#include <vector>

#include "rpg/linalg.hpp"

namespace rpg {

struct MetricPoint {
  Vector u;
  double g_det = 1.0;  // 1 + u^T u

  MetricPoint() = default;
  explicit MetricPoint(Vector u_in);

  int dim() const { return static_cast<int>(u.size()); }
};

struct GradientBundle {
  Vector grad;
  Vector reg_grad;
  std::optional<Vector> geo_grad;
};

/// Dense I + u u^T. Oracle use only.
Matrix metric_matrix(const MetricPoint& mp);

double metric_det(const MetricPoint& mp);

/// G^{-1} x via Sherman-Morrison.
Vector inverse_apply(const MetricPoint& mp, const Vector& x);

/// J = G^{-1} grad.
Vector regularized_gradient(const MetricPoint& mp, const Vector& grad);

/// x^T G y.
double bilinear_form(const MetricPoint& mp, const Vector& x, const Vector& y);

GradientBundle make_bundle(const MetricPoint& mp, const Vector& grad);

/// Sherman-Morrison with the metric vector of scalar type T and a constant
/// right-hand side; used inside the phi-differentiable loss.
template <class T>
std::vector<T> inverse_apply_generic(std::span<const T> u, const Vector& x) {
  T norm2 = 0.0;
  T ux = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    norm2 += u[i] * u[i];
    ux += u[i] * x(static_cast<Eigen::Index>(i));
  }
  const T coef = ux / (1.0 + norm2);
  std::vector<T> out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    out[i] = x(static_cast<Eigen::Index>(i)) - u[i] * coef;
  }
  return out;
}

}  // namespace rpg
