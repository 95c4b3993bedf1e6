#include "rpg/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rpg/error.hpp"
#include "rpg/geodesic.hpp"
#include "rpg/metric_field.hpp"
#include "rpg/parallel.hpp"
#include "rpg/rng.hpp"

namespace rpg {

namespace {

void require_dim(const FieldEvaluator& fe, const Vector& theta) {
  if (fe.n != theta.size()) {
    throw BadDimensions("divergence: theta has length " + std::to_string(theta.size()) +
                        ", field expects " + std::to_string(fe.n));
  }
}

void require_probes(const std::vector<Vector>& probes) {
  if (probes.empty()) throw BadDimensions("divergence: at least one probe is required");
}

double ordered_mean(const std::vector<double>& xs) {
  double acc = 0.0;
  for (double x : xs) acc += x;
  return acc / static_cast<double>(xs.size());
}

}  // namespace

Vector FieldEvaluator::field(const Vector& theta) const {
  const Vector grad = eval_checked(grad_fn, theta, "grad_fn");
  const MetricPoint mp(eval_checked(u_fn, theta, "u_fn"));
  return regularized_gradient(mp, grad);
}

double ProbeConfig::step_for(const Vector& theta) const {
  return fd_step > 0.0 ? fd_step : default_fd_step(theta);
}

std::vector<Vector> draw_probes(const ProbeConfig& pc, int n) {
  if (pc.probe_count < 1) throw BadDimensions("draw_probes: probe_count must be >= 1");
  RngStream rng(pc.seed);
  std::vector<Vector> probes;
  probes.reserve(static_cast<std::size_t>(pc.probe_count));
  for (int k = 0; k < pc.probe_count; ++k) probes.push_back(rademacher_probe(rng, n));
  return probes;
}

double divergence_exact(const FieldEvaluator& fe, const Vector& theta, double fd_step) {
  require_dim(fe, theta);
  const double h = fd_step > 0.0 ? fd_step : default_fd_step(theta);
  const Eigen::Index n = theta.size();
  const Vector j = fe.field(theta);
  const Vector u = eval_checked(fe.u_fn, theta, "u_fn");

  double trace = 0.0;
  Vector du_u(n);  // du_u(mu) = sum_nu u_nu d u_nu / d theta_mu
  Vector probe = theta;
  for (Eigen::Index mu = 0; mu < n; ++mu) {
    probe(mu) = theta(mu) + h;
    const Vector j_hi = fe.field(probe);
    const Vector u_hi = eval_checked(fe.u_fn, probe, "u_fn");
    probe(mu) = theta(mu) - h;
    const Vector j_lo = fe.field(probe);
    const Vector u_lo = eval_checked(fe.u_fn, probe, "u_fn");
    probe(mu) = theta(mu);
    trace += (j_hi(mu) - j_lo(mu)) / (2.0 * h);
    du_u(mu) = u.dot(u_hi - u_lo) / (2.0 * h);
  }
  return trace + j.dot(du_u) / (1.0 + u.squaredNorm());
}

double divergence_estimate(const FieldEvaluator& fe, const Vector& theta, const ProbeConfig& pc) {
  return divergence_estimate(fe, theta, draw_probes(pc, static_cast<int>(theta.size())),
                             pc.step_for(theta));
}

double divergence_estimate(const FieldEvaluator& fe, const Vector& theta,
                           const std::vector<Vector>& probes, double fd_step) {
  require_dim(fe, theta);
  require_probes(probes);
  const double h = fd_step;
  const std::vector<double> terms = parallel_map(probes.size(), [&](std::size_t k) {
    const Vector& v = probes[k];
    return v.dot(fe.field(theta + h * v) - fe.field(theta - h * v)) / (2.0 * h);
  });
  const double trace = ordered_mean(terms);

  const Vector j = fe.field(theta);
  const Vector u = eval_checked(fe.u_fn, theta, "u_fn");
  const double j_norm = j.norm();
  if (j_norm == 0.0) return trace;
  // Directional derivative of u along the unit vector J/|J|, rescaled by |J|.
  const Vector dir = j / j_norm;
  const Vector du = (eval_checked(fe.u_fn, theta + h * dir, "u_fn") -
                     eval_checked(fe.u_fn, theta - h * dir, "u_fn")) /
                    (2.0 * h) * j_norm;
  return trace + u.dot(du) / (1.0 + u.squaredNorm());
}

double laplace_beltrami_oracle(const ScalarField& f, const VectorField& u_fn, const Vector& theta) {
  const double h = default_fd_step(theta);
  const Eigen::Index n = theta.size();
  auto sqrt_g = [&](const Vector& p) {
    return std::sqrt(1.0 + eval_checked(u_fn, p, "u_fn").squaredNorm());
  };
  // sqrt(g) J at p, with grad f taken by central differences of f.
  auto weighted_field = [&](const Vector& p) -> Vector {
    const MetricPoint mp(eval_checked(u_fn, p, "u_fn"));
    return std::sqrt(mp.g_det) * inverse_apply(mp, fd_gradient(f, p, h));
  };
  double acc = 0.0;
  Vector probe = theta;
  for (Eigen::Index mu = 0; mu < n; ++mu) {
    probe(mu) = theta(mu) + h;
    const double hi = weighted_field(probe)(mu);
    probe(mu) = theta(mu) - h;
    const double lo = weighted_field(probe)(mu);
    probe(mu) = theta(mu);
    acc += (hi - lo) / (2.0 * h);
  }
  return acc / sqrt_g(theta);
}

double covariant_laplacian_oracle(const ScalarField& f, const VectorField& u_fn,
                                  const Vector& theta) {
  const double h = default_fd_step(theta);
  const int n = static_cast<int>(theta.size());
  const Vector grad = fd_gradient(f, theta, h);
  const Matrix g_inv = dense_inverse(metric_matrix(MetricPoint(eval_checked(u_fn, theta, "u_fn"))));
  const ChristoffelTensor gamma = christoffel_fd(u_fn, theta, h);

  // Hessian of f from central differences of the FD gradient.
  Matrix hess(n, n);
  Vector probe = theta;
  for (int mu = 0; mu < n; ++mu) {
    probe(mu) = theta(mu) + h;
    const Vector hi = fd_gradient(f, probe, h);
    probe(mu) = theta(mu) - h;
    const Vector lo = fd_gradient(f, probe, h);
    probe(mu) = theta(mu);
    hess.col(mu) = (hi - lo) / (2.0 * h);
  }
  hess = 0.5 * (hess + hess.transpose());

  double acc = 0.0;
  for (int mu = 0; mu < n; ++mu) {
    for (int nu = 0; nu < n; ++nu) {
      double connection = 0.0;
      for (int l = 0; l < n; ++l) connection += gamma(l, mu, nu) * grad(l);
      acc += g_inv(mu, nu) * (hess(mu, nu) - connection);
    }
  }
  return acc;
}

double hessian_trace_hutchinson(const VectorField& grad_fn, const Vector& theta,
                                const ProbeConfig& pc) {
  return hessian_trace_hutchinson(grad_fn, theta, draw_probes(pc, static_cast<int>(theta.size())),
                                  pc.step_for(theta));
}

double hessian_trace_hutchinson(const VectorField& grad_fn, const Vector& theta,
                                const std::vector<Vector>& probes, double fd_step) {
  require_probes(probes);
  const double h = fd_step;
  const std::vector<double> terms = parallel_map(probes.size(), [&](std::size_t k) {
    const Vector& v = probes[k];
    return v.dot(eval_checked(grad_fn, theta + h * v, "grad_fn") -
                 eval_checked(grad_fn, theta - h * v, "grad_fn")) /
           (2.0 * h);
  });
  return ordered_mean(terms);
}

double divergence_ratio(double div, double trace) {
  return std::abs(div) / std::max(std::abs(trace), 1e-12);
}

DivergenceReport divergence_report(const FieldEvaluator& fe, const Vector& theta,
                                   const ProbeConfig& pc) {
  const std::vector<Vector> probes = draw_probes(pc, static_cast<int>(theta.size()));
  const double h = pc.step_for(theta);
  DivergenceReport r;
  r.div = divergence_estimate(fe, theta, probes, h);
  r.hessian_trace = hessian_trace_hutchinson(fe.grad_fn, theta, probes, h);
  r.ratio = divergence_ratio(r.div, r.hessian_trace);
  r.method = DivergenceMethod::estimated;
  r.probe_count = pc.probe_count;
  r.fd_step = h;
  r.seed = pc.seed;
  return r;
}

}  // namespace rpg
