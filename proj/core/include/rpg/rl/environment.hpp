#pragma once

#include <memory>
#include <string>

#include "rpg/linalg.hpp"
#include "rpg/rng.hpp"

namespace rpg::rl {

struct StepResult {
  Vector state;
  double reward = 0.0;
  bool done = false;
};

class LandscapeEnv;

/// Episodic environment. All randomness comes from the caller's stream, so a
/// rollout is a pure function of (policy, stream).
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string kind() const = 0;
  virtual int state_dim() const = 0;
  virtual int action_dim() const = 0;
  virtual int horizon() const = 0;

  virtual Vector reset(RngStream& rng) const = 0;
  virtual StepResult step(const Vector& state, const Vector& action, RngStream& rng) const = 0;

  /// Non-null for the one-step analytic landscapes.
  virtual const LandscapeEnv* as_landscape() const { return nullptr; }
};

/// s' = A s + B a + noise_std * N(0, I), reward -(s^T Q s + a^T R a).
/// Start states are init_mean + init_std * N(0, I).
struct LqrSpec {
  Matrix a;
  Matrix b;
  Matrix q;
  Matrix r;
  double noise_std = 0.0;
  double init_std = 1.0;
  Vector init_mean;  // empty means zero
  int horizon = 50;

  int state_dim() const { return static_cast<int>(a.rows()); }
  int action_dim() const { return static_cast<int>(b.cols()); }
  Vector start_mean() const;
  void validate() const;

  /// Scalar system with A = B = Q = R = 1.
  static LqrSpec scalar(int horizon = 50, double noise_std = 0.0, double init_std = 1.0);
};

class LqrEnv final : public Environment {
 public:
  explicit LqrEnv(LqrSpec spec);

  std::string kind() const override { return "lqr"; }
  int state_dim() const override { return spec_.state_dim(); }
  int action_dim() const override { return spec_.action_dim(); }
  int horizon() const override { return spec_.horizon; }
  Vector reset(RngStream& rng) const override;
  StepResult step(const Vector& state, const Vector& action, RngStream& rng) const override;

  const LqrSpec& spec() const { return spec_; }

 private:
  LqrSpec spec_;
};

/// Planar double integrator (x, y, vx, vy) driven by accelerations, rewarded
/// for staying near the origin.
class PointMassEnv final : public Environment {
 public:
  explicit PointMassEnv(int horizon = 50, double dt = 0.1, double action_cost = 0.1);

  std::string kind() const override { return "pointmass"; }
  int state_dim() const override { return 4; }
  int action_dim() const override { return 2; }
  int horizon() const override { return horizon_; }
  Vector reset(RngStream& rng) const override;
  StepResult step(const Vector& state, const Vector& action, RngStream& rng) const override;

 private:
  int horizon_;
  double dt_;
  double action_cost_;
};

enum class LandscapeKind { quadratic, rosenbrock };

/// One-step environment whose return is an analytic function of theta itself.
/// quadratic: -1/2 sum d_i theta_i^2. rosenbrock: -sum_i [100 (t_{i+1} - t_i^2)^2 + (1 - t_i)^2].
class LandscapeEnv final : public Environment {
 public:
  LandscapeEnv(LandscapeKind kind, Vector diag);

  static LandscapeEnv bowl(int n);  // diag(1, ..., n)
  static LandscapeEnv rosenbrock(int n);

  std::string kind() const override;
  int state_dim() const override { return 0; }
  int action_dim() const override { return 0; }
  int horizon() const override { return 1; }
  Vector reset(RngStream& rng) const override;
  StepResult step(const Vector& state, const Vector& action, RngStream& rng) const override;
  const LandscapeEnv* as_landscape() const override { return this; }

  int dim() const { return static_cast<int>(diag_.size()); }
  LandscapeKind landscape() const { return kind_; }
  double value(const Vector& theta) const;
  Vector gradient(const Vector& theta) const;  // ascent direction of value
  Vector optimum() const;

 private:
  LandscapeKind kind_;
  Vector diag_;
};

enum class EnvKind { lqr, pointmass, landscape_quadratic, landscape_rosenbrock };

struct EnvSpec {
  EnvKind kind = EnvKind::lqr;
  LqrSpec lqr = LqrSpec::scalar();
  int horizon = 50;    // pointmass
  int landscape_dim = 8;
};

/// Throws BadDimensions for inconsistent specs (LQR state_dim must be <= 4).
std::unique_ptr<Environment> make_env(const EnvSpec& spec);

const char* to_string(EnvKind kind);

}  // namespace rpg::rl
