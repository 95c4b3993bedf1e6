#pragma once

// Exact expected-cost oracle for linear policies a = W s + b (+ optional
// Gaussian action noise) on an LqrSpec. With x = [s; 1] and L = [W b], the
// second moment X_t = E[x_t x_t^T] obeys X_{t+1} = M X_t M^T + N.

#include "rpg/linalg.hpp"
#include "rpg/rl/environment.hpp"

namespace rpg::rl {

/// Expected discounted cost sum_{t<horizon} gamma^t E[s^T Q s + a^T R a].
double lqr_cost(const LqrSpec& spec, const Matrix& gain, double gamma, int horizon,
                double action_std = 0.0);

/// d lqr_cost / d gain (same shape as gain, action_dim x (state_dim + 1)),
/// by the backward adjoint recursion P_t = gamma^t S + M^T P_{t+1} M.
Matrix lqr_cost_gradient(const LqrSpec& spec, const Matrix& gain, double gamma, int horizon,
                         double action_std = 0.0);

/// Wrappers over the linear PolicyMLP parameter order [W (row-major), b, ...];
/// trailing entries (a learnable log-std) are ignored by lqr_gain_from_theta
/// and receive zero gradient.
Matrix lqr_gain_from_theta(const LqrSpec& spec, const Vector& theta);
Vector lqr_theta_gradient(const LqrSpec& spec, const Vector& theta, double gamma, int horizon,
                          double action_std = 0.0);

/// Stationary discounted Riccati solution: returns K with a = -K s optimal for
/// the infinite-horizon discounted problem. Throws NoConvergence.
Matrix riccati_gain(const LqrSpec& spec, double gamma);

/// [-K, 0]: the Riccati policy in gain form.
Matrix riccati_policy(const LqrSpec& spec, double gamma);

}  // namespace rpg::rl
