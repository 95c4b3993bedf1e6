#include "rpg/rl/environment.hpp"

#include <string>
#include <utility>

#include "rpg/error.hpp"

namespace rpg::rl {

namespace {

Vector normal_vector(RngStream& rng, int n) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.normal();
  return v;
}

}  // namespace

Vector LqrSpec::start_mean() const {
  return init_mean.size() == 0 ? Vector::Zero(state_dim()) : init_mean;
}

void LqrSpec::validate() const {
  const Eigen::Index d = a.rows();
  if (d < 1 || d > 4 || a.cols() != d) throw BadDimensions("lqr: A must be square with 1 <= dim <= 4");
  if (b.rows() != d || b.cols() < 1) throw BadDimensions("lqr: B must have state_dim rows");
  if (q.rows() != d || q.cols() != d) throw BadDimensions("lqr: Q must be state_dim x state_dim");
  if (r.rows() != b.cols() || r.cols() != b.cols()) {
    throw BadDimensions("lqr: R must be action_dim x action_dim");
  }
  if (init_mean.size() != 0 && init_mean.size() != d) throw BadDimensions("lqr: init_mean has the wrong length");
  if (horizon < 1) throw BadDimensions("lqr: horizon must be >= 1");
  if (noise_std < 0.0 || init_std < 0.0) throw BadDimensions("lqr: noise scales must be non-negative");
}

LqrSpec LqrSpec::scalar(int horizon, double noise_std, double init_std) {
  LqrSpec s;
  s.a = Matrix::Ones(1, 1);
  s.b = Matrix::Ones(1, 1);
  s.q = Matrix::Ones(1, 1);
  s.r = Matrix::Ones(1, 1);
  s.horizon = horizon;
  s.noise_std = noise_std;
  s.init_std = init_std;
  return s;
}

LqrEnv::LqrEnv(LqrSpec spec) : spec_(std::move(spec)) { spec_.validate(); }

Vector LqrEnv::reset(RngStream& rng) const {
  return spec_.start_mean() + spec_.init_std * normal_vector(rng, spec_.state_dim());
}

StepResult LqrEnv::step(const Vector& state, const Vector& action, RngStream& rng) const {
  StepResult out;
  out.reward = -(state.dot(spec_.q * state) + action.dot(spec_.r * action));
  out.state = spec_.a * state + spec_.b * action;
  if (spec_.noise_std > 0.0) out.state += spec_.noise_std * normal_vector(rng, spec_.state_dim());
  return out;
}

PointMassEnv::PointMassEnv(int horizon, double dt, double action_cost)
    : horizon_(horizon), dt_(dt), action_cost_(action_cost) {
  if (horizon < 1 || dt <= 0.0) throw BadDimensions("pointmass: horizon and dt must be positive");
}

Vector PointMassEnv::reset(RngStream& rng) const {
  Vector s = Vector::Zero(4);
  s(0) = rng.uniform(-1.0, 1.0);
  s(1) = rng.uniform(-1.0, 1.0);
  return s;
}

StepResult PointMassEnv::step(const Vector& state, const Vector& action, RngStream& /*rng*/) const {
  StepResult out;
  out.reward = -(state.head(2).squaredNorm() + action_cost_ * action.squaredNorm());
  out.state = state;
  out.state.head(2) += dt_ * state.tail(2);
  out.state.tail(2) += dt_ * action;
  return out;
}

LandscapeEnv::LandscapeEnv(LandscapeKind kind, Vector diag) : kind_(kind), diag_(std::move(diag)) {
  if (diag_.size() < 1) throw BadDimensions("landscape: dimension must be >= 1");
  if (kind_ == LandscapeKind::rosenbrock && diag_.size() < 2) {
    throw BadDimensions("landscape: rosenbrock needs dimension >= 2");
  }
}

LandscapeEnv LandscapeEnv::bowl(int n) {
  if (n < 1) throw BadDimensions("landscape: dimension must be >= 1");
  return {LandscapeKind::quadratic, Vector::LinSpaced(n, 1.0, static_cast<double>(n))};
}

LandscapeEnv LandscapeEnv::rosenbrock(int n) { return {LandscapeKind::rosenbrock, Vector::Ones(n)}; }

std::string LandscapeEnv::kind() const {
  return kind_ == LandscapeKind::quadratic ? "landscape_quadratic" : "landscape_rosenbrock";
}

Vector LandscapeEnv::reset(RngStream& /*rng*/) const { return Vector(0); }

StepResult LandscapeEnv::step(const Vector& /*state*/, const Vector& /*action*/,
                              RngStream& /*rng*/) const {
  return {Vector(0), 0.0, true};
}

double LandscapeEnv::value(const Vector& theta) const {
  if (theta.size() != diag_.size()) throw BadDimensions("landscape: theta has the wrong length");
  if (kind_ == LandscapeKind::quadratic) return -0.5 * theta.dot(diag_.cwiseProduct(theta));
  double acc = 0.0;
  for (Eigen::Index i = 0; i + 1 < theta.size(); ++i) {
    const double a = theta(i + 1) - theta(i) * theta(i);
    const double b = 1.0 - theta(i);
    acc += 100.0 * a * a + b * b;
  }
  return -acc;
}

Vector LandscapeEnv::gradient(const Vector& theta) const {
  if (theta.size() != diag_.size()) throw BadDimensions("landscape: theta has the wrong length");
  if (kind_ == LandscapeKind::quadratic) return -diag_.cwiseProduct(theta);
  Vector g = Vector::Zero(theta.size());
  for (Eigen::Index i = 0; i + 1 < theta.size(); ++i) {
    const double a = theta(i + 1) - theta(i) * theta(i);
    g(i) -= -400.0 * theta(i) * a - 2.0 * (1.0 - theta(i));
    g(i + 1) -= 200.0 * a;
  }
  return g;
}

Vector LandscapeEnv::optimum() const {
  return kind_ == LandscapeKind::quadratic ? Vector::Zero(diag_.size()) : Vector::Ones(diag_.size());
}

std::unique_ptr<Environment> make_env(const EnvSpec& spec) {
  switch (spec.kind) {
    case EnvKind::lqr:
      return std::make_unique<LqrEnv>(spec.lqr);
    case EnvKind::pointmass:
      return std::make_unique<PointMassEnv>(spec.horizon);
    case EnvKind::landscape_quadratic:
      return std::make_unique<LandscapeEnv>(LandscapeEnv::bowl(spec.landscape_dim));
    case EnvKind::landscape_rosenbrock:
      return std::make_unique<LandscapeEnv>(LandscapeEnv::rosenbrock(spec.landscape_dim));
  }
  throw BadDimensions("make_env: unknown environment kind");
}

const char* to_string(EnvKind kind) {
  switch (kind) {
    case EnvKind::lqr:
      return "lqr";
    case EnvKind::pointmass:
      return "pointmass";
    case EnvKind::landscape_quadratic:
      return "landscape_quadratic";
    case EnvKind::landscape_rosenbrock:
      return "landscape_rosenbrock";
  }
  return "unknown";
}

}  // namespace rpg::rl
