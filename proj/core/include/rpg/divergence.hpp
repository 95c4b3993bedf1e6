#pragma once

// Divergence of the regularized gradient field J = G^{-1} grad f under the
// metric G = I + u u^T, the Hutchinson Hessian trace, and two brute-force
// oracles (Laplace-Beltrami and covariant Laplacian) used by the tests.

#include <cstdint>
#include <vector>

#include "rpg/fields.hpp"
#include "rpg/linalg.hpp"

namespace rpg {

struct FieldEvaluator {
  VectorField grad_fn;
  VectorField u_fn;
  int n = 0;

  /// J(theta) = G(theta)^{-1} grad f(theta).
  Vector field(const Vector& theta) const;
};

struct ProbeConfig {
  int probe_count = 64;
  double fd_step = 0.0;  // <= 0 selects default_fd_step(theta)
  std::uint64_t seed = 0;

  double step_for(const Vector& theta) const;
};

enum class DivergenceMethod { exact, estimated };

struct DivergenceReport {
  double div = 0.0;
  double hessian_trace = 0.0;
  double ratio = 0.0;
  DivergenceMethod method = DivergenceMethod::estimated;
  int probe_count = 0;
  double fd_step = 0.0;
  std::uint64_t seed = 0;
};

/// K Rademacher probes of length n from RngStream(pc.seed).
std::vector<Vector> draw_probes(const ProbeConfig& pc, int n);

/// Coordinate-wise divergence: sum_mu dJ_mu/dtheta_mu + J . (Du)^T u / (1 + |u|^2).
double divergence_exact(const FieldEvaluator& fe, const Vector& theta, double fd_step);

/// Hutchinson trace of DJ plus the volume term as one directional derivative
/// of u along J.
double divergence_estimate(const FieldEvaluator& fe, const Vector& theta, const ProbeConfig& pc);
double divergence_estimate(const FieldEvaluator& fe, const Vector& theta,
                           const std::vector<Vector>& probes, double fd_step);

/// (1/sqrt g) sum_mu d_mu(sqrt g J^mu) with grad f itself taken by finite
/// differences of f. Small n only.
double laplace_beltrami_oracle(const ScalarField& f, const VectorField& u_fn, const Vector& theta);

/// g^{mu nu} (d_mu d_nu f - Gamma^l_{mu nu} d_l f). Small n only.
double covariant_laplacian_oracle(const ScalarField& f, const VectorField& u_fn,
                                  const Vector& theta);

double hessian_trace_hutchinson(const VectorField& grad_fn, const Vector& theta,
                                const ProbeConfig& pc);
double hessian_trace_hutchinson(const VectorField& grad_fn, const Vector& theta,
                                const std::vector<Vector>& probes, double fd_step);

/// |div| / max(|trace|, 1e-12).
double divergence_ratio(double div, double trace);

/// Estimated divergence and Hessian trace from one shared probe set.
DivergenceReport divergence_report(const FieldEvaluator& fe, const Vector& theta,
                                   const ProbeConfig& pc);

}  // namespace rpg
