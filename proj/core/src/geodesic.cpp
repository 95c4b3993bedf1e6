#include "rpg/geodesic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rpg/error.hpp"
#include "rpg/metric_field.hpp"

namespace rpg {

namespace {

double step_or_default(double step, const Vector& theta) {
  return step > 0.0 ? step : default_fd_step(theta);
}

void require_len(const Vector& v, Eigen::Index n, const char* what) {
  if (v.size() != n) throw BadDimensions(std::string(what) + ": dimension mismatch");
}

/// d G / d theta_rho for every rho.
std::vector<Matrix> metric_partials(const VectorField& u_field, const Vector& theta, double h) {
  const Eigen::Index n = theta.size();
  std::vector<Matrix> d(static_cast<std::size_t>(n));
  Vector probe = theta;
  for (Eigen::Index r = 0; r < n; ++r) {
    probe(r) = theta(r) + h;
    const Matrix hi = metric_matrix(MetricPoint(eval_checked(u_field, probe, "metric_partials")));
    probe(r) = theta(r) - h;
    const Matrix lo = metric_matrix(MetricPoint(eval_checked(u_field, probe, "metric_partials")));
    probe(r) = theta(r);
    d[static_cast<std::size_t>(r)] = (hi - lo) / (2.0 * h);
  }
  return d;
}

}  // namespace

Vector ChristoffelTensor::contract(const Vector& a, const Vector& b) const {
  Vector out = Vector::Zero(n);
  for (int d = 0; d < n; ++d) {
    double acc = 0.0;
    for (int mu = 0; mu < n; ++mu) {
      for (int nu = 0; nu < n; ++nu) acc += (*this)(d, mu, nu) * a(mu) * b(nu);
    }
    out(d) = acc;
  }
  return out;
}

double ChristoffelTensor::symmetry_residual() const {
  double worst = 0.0;
  for (int d = 0; d < n; ++d) {
    for (int mu = 0; mu < n; ++mu) {
      for (int nu = 0; nu < n; ++nu) {
        worst = std::max(worst, std::abs((*this)(d, mu, nu) - (*this)(d, nu, mu)));
      }
    }
  }
  return worst;
}

Vector geodesic_gradient(const VectorField& u_field, const Vector& theta, const Vector& j,
                         const GeodesicConfig& cfg) {
  require_len(j, theta.size(), "geodesic_gradient");
  if (!all_finite(j)) throw NonFiniteField("geodesic_gradient: J is non-finite");
  if (cfg.kappa == 0.0) return j;
  const double h = step_or_default(cfg.fd_step, theta);
  const double jj = j.squaredNorm();
  // q(theta') = J^T G(theta') J with J held fixed.
  const ScalarField q = [&](const Vector& p) {
    const double uj = eval_checked(u_field, p, "geodesic_gradient").dot(j);
    return jj + uj * uj;
  };
  const Vector grad_q = fd_gradient(q, theta, h);
  const MetricPoint mp(eval_checked(u_field, theta, "geodesic_gradient"));
  return j + cfg.kappa * inverse_apply(mp, grad_q);
}

Vector geodesic_gradient_component(const VectorField& u_field, const Vector& theta,
                                   const Vector& j, const GeodesicConfig& cfg) {
  require_len(j, theta.size(), "geodesic_gradient_component");
  if (!all_finite(j)) throw NonFiniteField("geodesic_gradient_component: J is non-finite");
  if (cfg.kappa == 0.0) return j;
  const double h = step_or_default(cfg.fd_step, theta);
  const Eigen::Index n = theta.size();
  const std::vector<Matrix> dg = metric_partials(u_field, theta, h);
  Vector contraction(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const Matrix& d = dg[static_cast<std::size_t>(r)];
    double acc = 0.0;
    for (Eigen::Index mu = 0; mu < n; ++mu) {
      for (Eigen::Index nu = 0; nu < n; ++nu) acc += d(mu, nu) * j(mu) * j(nu);
    }
    contraction(r) = acc;
  }
  const MetricPoint mp(eval_checked(u_field, theta, "geodesic_gradient_component"));
  return j + cfg.kappa * inverse_apply(mp, contraction);
}

ChristoffelTensor christoffel_fd(const VectorField& u_field, const Vector& theta, double fd_step) {
  const double h = step_or_default(fd_step, theta);
  const int n = static_cast<int>(theta.size());
  const std::vector<Matrix> dg = metric_partials(u_field, theta, h);
  const Matrix g_inv =
      dense_inverse(metric_matrix(MetricPoint(eval_checked(u_field, theta, "christoffel_fd"))));
  ChristoffelTensor gamma(n);
  for (int d = 0; d < n; ++d) {
    for (int mu = 0; mu < n; ++mu) {
      for (int nu = 0; nu < n; ++nu) {
        double acc = 0.0;
        for (int r = 0; r < n; ++r) {
          acc += g_inv(d, r) * (dg[static_cast<std::size_t>(mu)](nu, r) +
                                dg[static_cast<std::size_t>(nu)](mu, r) -
                                dg[static_cast<std::size_t>(r)](mu, nu));
        }
        gamma(d, mu, nu) = 0.5 * acc;
      }
    }
  }
  return gamma;
}

double metric_compatibility_residual(const VectorField& u_field, const Vector& theta,
                                     double fd_step) {
  const double h = step_or_default(fd_step, theta);
  const int n = static_cast<int>(theta.size());
  const std::vector<Matrix> dg = metric_partials(u_field, theta, h);
  const ChristoffelTensor gamma = christoffel_fd(u_field, theta, h);
  const Matrix g = metric_matrix(MetricPoint(eval_checked(u_field, theta, "metric_compatibility")));
  double worst = 0.0;
  for (int l = 0; l < n; ++l) {
    for (int mu = 0; mu < n; ++mu) {
      for (int nu = 0; nu < n; ++nu) {
        double r = dg[static_cast<std::size_t>(l)](mu, nu);
        for (int k = 0; k < n; ++k) r -= gamma(k, l, mu) * g(k, nu) + gamma(k, l, nu) * g(mu, k);
        worst = std::max(worst, std::abs(r));
      }
    }
  }
  return worst;
}

Vector geodesic_ode_direction(const VectorField& u_field, const Vector& theta, const Vector& j,
                              double dt) {
  require_len(j, theta.size(), "geodesic_ode_direction");
  if (dt == 0.0) return j;
  const double h = default_fd_step(theta);
  const Vector accel0 = -christoffel_fd(u_field, theta, h).contract(j, j);
  const Vector theta_mid = theta + 0.5 * dt * j;
  const Vector v_mid = j + 0.5 * dt * accel0;
  const Vector accel_mid = -christoffel_fd(u_field, theta_mid, h).contract(v_mid, v_mid);
  return j + dt * accel_mid;
}

double angle_between(const Vector& a, const Vector& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  // Half-angle form stays accurate for nearly parallel vectors.
  const Vector ua = a / na;
  const Vector ub = b / nb;
  return 2.0 * std::atan2((ua - ub).norm(), (ua + ub).norm());
}

}  // namespace rpg
