#pragma once

#include <functional>

#include "rpg/linalg.hpp"

namespace rpg {

using ScalarField = std::function<double(const Vector&)>;
using VectorField = std::function<Vector(const Vector&)>;

/// Central-difference step used when a caller passes a non-positive step.
inline double default_fd_step(const Vector& theta) {
  return 1e-4 * (1.0 + (theta.size() > 0 ? theta.cwiseAbs().maxCoeff() : 0.0));
}

/// Evaluates `field` and throws NonFiniteField if the result has NaN/Inf.
Vector eval_checked(const VectorField& field, const Vector& theta, const char* what);

/// Central-difference gradient of a scalar field.
Vector fd_gradient(const ScalarField& f, const Vector& theta, double step);

}  // namespace rpg
