#pragma once

// Geodesic-corrected update direction and the Christoffel / geodesic-ODE
// oracles it is checked against. Every metric here is G(theta) = I + u u^T
// with u supplied as a field over theta; theta-derivatives are central
// differences.

#include <vector>

#include "rpg/fields.hpp"
#include "rpg/linalg.hpp"

namespace rpg {

struct GeodesicConfig {
  double kappa = 0.1;    // zeta_2 / (1 + zeta_1)
  double fd_step = 0.0;  // <= 0 selects default_fd_step(theta)
};

/// Gamma^delta_{mu nu}, stored delta-major.
struct ChristoffelTensor {
  int n = 0;
  std::vector<double> data;

  ChristoffelTensor() = default;
  explicit ChristoffelTensor(int dim)
      : n(dim), data(static_cast<std::size_t>(dim) * dim * dim, 0.0) {}

  double& operator()(int delta, int mu, int nu) { return data[index(delta, mu, nu)]; }
  double operator()(int delta, int mu, int nu) const { return data[index(delta, mu, nu)]; }

  /// Gamma^delta(a, b) = sum_{mu nu} Gamma^delta_{mu nu} a^mu b^nu.
  Vector contract(const Vector& a, const Vector& b) const;

  /// max |Gamma^d_{mu nu} - Gamma^d_{nu mu}|.
  double symmetry_residual() const;

 private:
  std::size_t index(int delta, int mu, int nu) const {
    return (static_cast<std::size_t>(delta) * n + mu) * n + nu;
  }
};

/// T / (1 + zeta_1) = J + kappa G^{-1} grad_theta (J^T G(theta) J), J frozen.
Vector geodesic_gradient(const VectorField& u_field, const Vector& theta, const Vector& j,
                         const GeodesicConfig& cfg);

/// Same direction from the index form J + kappa sum g^{d r} d_r g_{mu nu} J^mu J^nu,
/// with d_r g built densely. Small n only.
Vector geodesic_gradient_component(const VectorField& u_field, const Vector& theta,
                                   const Vector& j, const GeodesicConfig& cfg);

/// Gamma from finite differences of the dense metric. Small n only.
ChristoffelTensor christoffel_fd(const VectorField& u_field, const Vector& theta, double fd_step);

/// max |d_l g_{mu nu} - Gamma^r_{l mu} g_{r nu} - Gamma^r_{l nu} g_{mu r}|.
double metric_compatibility_residual(const VectorField& u_field, const Vector& theta,
                                     double fd_step);

/// Tangent after one midpoint (RK2) step of theta'' = -Gamma(theta', theta')
/// from (theta, J) over dt.
Vector geodesic_ode_direction(const VectorField& u_field, const Vector& theta, const Vector& j,
                              double dt);

/// Angle in radians between two non-zero vectors.
double angle_between(const Vector& a, const Vector& b);

}  // namespace rpg
