#include "rpg/rl/lqr.hpp"

#include <cmath>
#include <vector>

#include "rpg/error.hpp"

namespace rpg::rl {

namespace {

struct Augmented {
  Matrix m;      // closed-loop transition of x = [s; 1]
  Matrix n;      // additive noise second moment
  Matrix s;      // per-step cost weight, Q_hat + L^T R L
  Matrix b_hat;  // [B; 0]
  Matrix x0;
  double noise_cost = 0.0;  // action_std^2 tr(R)
};

Augmented augment(const LqrSpec& spec, const Matrix& gain, double action_std) {
  spec.validate();
  const int d = spec.state_dim();
  const int m = spec.action_dim();
  if (gain.rows() != m || gain.cols() != d + 1) throw BadDimensions("lqr: gain must be action_dim x (state_dim + 1)");
  Augmented a;
  Matrix a_hat = Matrix::Zero(d + 1, d + 1);
  a_hat.topLeftCorner(d, d) = spec.a;
  a_hat(d, d) = 1.0;
  a.b_hat = Matrix::Zero(d + 1, m);
  a.b_hat.topRows(d) = spec.b;
  a.m = a_hat + a.b_hat * gain;

  a.n = Matrix::Zero(d + 1, d + 1);
  a.n.topLeftCorner(d, d) = spec.noise_std * spec.noise_std * Matrix::Identity(d, d) +
                            action_std * action_std * spec.b * spec.b.transpose();

  Matrix q_hat = Matrix::Zero(d + 1, d + 1);
  q_hat.topLeftCorner(d, d) = spec.q;
  a.s = q_hat + gain.transpose() * spec.r * gain;
  a.noise_cost = action_std * action_std * spec.r.trace();

  const Vector mu = spec.start_mean();
  a.x0 = Matrix::Zero(d + 1, d + 1);
  a.x0.topLeftCorner(d, d) = spec.init_std * spec.init_std * Matrix::Identity(d, d) + mu * mu.transpose();
  a.x0.block(0, d, d, 1) = mu;
  a.x0.block(d, 0, 1, d) = mu.transpose();
  a.x0(d, d) = 1.0;
  return a;
}

}  // namespace

double lqr_cost(const LqrSpec& spec, const Matrix& gain, double gamma, int horizon,
                double action_std) {
  const Augmented a = augment(spec, gain, action_std);
  Matrix x = a.x0;
  double cost = 0.0;
  double discount = 1.0;
  for (int t = 0; t < horizon; ++t) {
    cost += discount * ((a.s * x).trace() + a.noise_cost);
    x = a.m * x * a.m.transpose() + a.n;
    discount *= gamma;
  }
  return cost;
}

Matrix lqr_cost_gradient(const LqrSpec& spec, const Matrix& gain, double gamma, int horizon,
                         double action_std) {
  const Augmented a = augment(spec, gain, action_std);
  std::vector<Matrix> xs;
  xs.reserve(static_cast<std::size_t>(horizon));
  Matrix x = a.x0;
  for (int t = 0; t < horizon; ++t) {
    xs.push_back(x);
    x = a.m * x * a.m.transpose() + a.n;
  }
  const Matrix r_gain = spec.r * gain;
  Matrix grad = Matrix::Zero(gain.rows(), gain.cols());
  Matrix p_next = Matrix::Zero(a.m.rows(), a.m.cols());  // P_{t+1}, zero past the horizon
  for (int t = horizon - 1; t >= 0; --t) {
    const double discount = std::pow(gamma, t);
    const Matrix& xt = xs[static_cast<std::size_t>(t)];
    grad += 2.0 * discount * r_gain * xt + 2.0 * a.b_hat.transpose() * p_next * a.m * xt;
    p_next = discount * a.s + a.m.transpose() * p_next * a.m;
  }
  return grad;
}

Matrix lqr_gain_from_theta(const LqrSpec& spec, const Vector& theta) {
  const int d = spec.state_dim();
  const int m = spec.action_dim();
  if (theta.size() < m * (d + 1)) throw LayoutMismatch("lqr: theta too short for a linear policy");
  Matrix gain(m, d + 1);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < d; ++j) gain(i, j) = theta(i * d + j);
    gain(i, d) = theta(m * d + i);
  }
  return gain;
}

Vector lqr_theta_gradient(const LqrSpec& spec, const Vector& theta, double gamma, int horizon,
                          double action_std) {
  const int d = spec.state_dim();
  const int m = spec.action_dim();
  const Matrix g = lqr_cost_gradient(spec, lqr_gain_from_theta(spec, theta), gamma, horizon, action_std);
  Vector out = Vector::Zero(theta.size());
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < d; ++j) out(i * d + j) = g(i, j);
    out(m * d + i) = g(i, d);
  }
  return out;
}

Matrix riccati_gain(const LqrSpec& spec, double gamma) {
  spec.validate();
  Matrix p = spec.q;
  for (int it = 0; it < 100000; ++it) {
    const Matrix bpb = spec.r + gamma * spec.b.transpose() * p * spec.b;
    const Matrix k = gamma * dense_inverse(bpb) * spec.b.transpose() * p * spec.a;
    const Matrix closed = spec.a - spec.b * k;
    const Matrix next = spec.q + k.transpose() * spec.r * k + gamma * closed.transpose() * p * closed;
    const double change = max_abs(next - p);
    p = next;
    if (change <= 1e-14 * std::max(1.0, max_abs(p))) {
      return gamma * dense_inverse(spec.r + gamma * spec.b.transpose() * p * spec.b) *
             spec.b.transpose() * p * spec.a;
    }
  }
  throw NoConvergence("riccati_gain: value iteration did not converge");
}

Matrix riccati_policy(const LqrSpec& spec, double gamma) {
  const Matrix k = riccati_gain(spec, gamma);
  Matrix gain = Matrix::Zero(spec.action_dim(), spec.state_dim() + 1);
  gain.leftCols(spec.state_dim()) = -k;
  return gain;
}

}  // namespace rpg::rl
