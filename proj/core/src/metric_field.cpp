#include "rpg/metric_field.hpp"

#include <string>
#include <utility>

#include "rpg/error.hpp"

namespace rpg {

namespace {

void require_same(const MetricPoint& mp, const Vector& x, const char* what) {
  if (x.size() != mp.u.size()) {
    throw BadDimensions(std::string(what) + ": vector length " + std::to_string(x.size()) +
                        " does not match metric dimension " + std::to_string(mp.u.size()));
  }
}

}  // namespace

MetricPoint::MetricPoint(Vector u_in) : u(std::move(u_in)), g_det(1.0 + u.squaredNorm()) {}

Matrix metric_matrix(const MetricPoint& mp) {
  return Matrix::Identity(mp.dim(), mp.dim()) + mp.u * mp.u.transpose();
}

double metric_det(const MetricPoint& mp) { return mp.g_det; }

Vector inverse_apply(const MetricPoint& mp, const Vector& x) {
  require_same(mp, x, "inverse_apply");
  return x - mp.u * (mp.u.dot(x) / mp.g_det);
}

Vector regularized_gradient(const MetricPoint& mp, const Vector& grad) {
  return inverse_apply(mp, grad);
}

double bilinear_form(const MetricPoint& mp, const Vector& x, const Vector& y) {
  require_same(mp, x, "bilinear_form");
  require_same(mp, y, "bilinear_form");
  return x.dot(y) + mp.u.dot(x) * mp.u.dot(y);
}

GradientBundle make_bundle(const MetricPoint& mp, const Vector& grad) {
  return {grad, regularized_gradient(mp, grad), std::nullopt};
}

}  // namespace rpg
