#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "rpg/error.hpp"
#include "rpg/rl/environment.hpp"
#include "rpg/rl/lqr.hpp"
#include "rpg/rl/policy.hpp"
#include "rpg/rl/reinforce.hpp"
#include "rpg/rl/replay_buffer.hpp"
#include "test_util.hpp"

using namespace rpg;
using namespace rpg::rl;
using rpg::test::random_vector;

namespace {

// Every step pays the same reward, so all advantages vanish.
class ConstantRewardEnv final : public Environment {
 public:
  std::string kind() const override { return "constant"; }
  int state_dim() const override { return 2; }
  int action_dim() const override { return 1; }
  int horizon() const override { return 20; }
  Vector reset(RngStream& rng) const override { return random_vector(rng, 2); }
  StepResult step(const Vector& state, const Vector& action, RngStream&) const override {
    return {Vector(state * 0.9 + Vector::Constant(2, action(0))), -1.0, false};
  }
};

PolicyConfig linear_policy(PolicyHead head, double log_std = -0.5) {
  PolicyConfig c;
  c.hidden = {};
  c.head = head;
  c.init_log_std = log_std;
  return c;
}

// Deterministic rollout of the scalar system from s0 with a = w s + b.
double rollout_cost(const LqrSpec& spec, double w, double b, double s0, double gamma) {
  const LqrEnv env(spec);
  RngStream rng(0);
  Vector s = Vector::Constant(1, s0);
  double cost = 0.0, disc = 1.0;
  for (int t = 0; t < spec.horizon; ++t) {
    const Vector a = Vector::Constant(1, w * s(0) + b);
    const StepResult r = env.step(s, a, rng);
    cost -= disc * r.reward;
    disc *= gamma;
    s = r.state;
  }
  return cost;
}

}  // namespace

TEST(Landscape, BowlOptimum) {
  const LandscapeEnv bowl = LandscapeEnv::bowl(5);
  EXPECT_EQ(bowl.optimum(), Vector::Zero(5));
  EXPECT_EQ(bowl.value(Vector::Zero(5)), 0.0);
  EXPECT_EQ(bowl.gradient(Vector::Zero(5)), Vector::Zero(5));
  Vector t = Vector::Zero(5);
  t(2) = 2.0;
  EXPECT_DOUBLE_EQ(bowl.value(t), -0.5 * 3.0 * 4.0);
  EXPECT_DOUBLE_EQ(bowl.gradient(t)(2), -6.0);
}

TEST(Landscape, RosenbrockOptimumAndGradient) {
  const LandscapeEnv r = LandscapeEnv::rosenbrock(4);
  EXPECT_EQ(r.value(r.optimum()), 0.0);
  RngStream rng(91);
  const Vector t = random_vector(rng, 4);
  const double h = 1e-6;
  for (int i = 0; i < 4; ++i) {
    Vector p = t, m = t;
    p(i) += h;
    m(i) -= h;
    EXPECT_NEAR(r.gradient(t)(i), (r.value(p) - r.value(m)) / (2.0 * h), 1e-5);
  }
}

TEST(MakeEnv, KindsAndValidation) {
  EnvSpec s;
  EXPECT_EQ(make_env(s)->kind(), "lqr");
  s.kind = EnvKind::pointmass;
  EXPECT_EQ(make_env(s)->state_dim(), 4);
  s.kind = EnvKind::landscape_quadratic;
  s.landscape_dim = 3;
  ASSERT_NE(make_env(s)->as_landscape(), nullptr);
  EXPECT_EQ(make_env(s)->as_landscape()->dim(), 3);

  EnvSpec big;
  big.lqr.a = Matrix::Identity(5, 5);
  big.lqr.b = Matrix::Identity(5, 1);
  big.lqr.q = Matrix::Identity(5, 5);
  big.lqr.r = Matrix::Identity(1, 1);
  EXPECT_THROW(make_env(big), BadDimensions);
}

TEST(Riccati, ScalarGainMatchesFixedPoint) {
  const double gamma = 0.99;
  double p = 1.0;
  for (int i = 0; i < 10000; ++i) p = 1.0 + gamma * p - gamma * gamma * p * p / (1.0 + gamma * p);
  const double k = gamma * p / (1.0 + gamma * p);
  const Matrix got = riccati_gain(LqrSpec::scalar(), gamma);
  ASSERT_EQ(got.rows(), 1);
  EXPECT_NEAR(got(0, 0), k, 1e-10);
  const Matrix pol = riccati_policy(LqrSpec::scalar(), gamma);
  EXPECT_NEAR(pol(0, 0), -k, 1e-10);
  EXPECT_EQ(pol(0, 1), 0.0);
}

TEST(PointMass, RestAtOriginEarnsNothing) {
  const PointMassEnv env(30);
  const PolicyMLP policy(PolicyConfig{4, 2, {8}, PolicyHead::deterministic, -0.5, true, 1.0});
  const Vector theta = Vector::Zero(policy.dim());
  RngStream rng(92);
  const Vector start = Vector::Zero(4);
  const Trajectory tr = rollout(env, policy, theta, rng, &start);
  EXPECT_EQ(tr.length(), 30u);
  EXPECT_EQ(tr.total_reward(), 0.0);
}

TEST(Returns, ForwardAndBackwardAccumulationAgree) {
  const std::vector<double> dyadic = {1.0, -2.0, 0.5, 3.0, -0.25};
  EXPECT_EQ(discounted_return(dyadic, 0.5), returns_to_go(dyadic, 0.5).front());

  RngStream rng(93);
  std::vector<double> r(100);
  for (double& x : r) x = rng.normal();
  const std::vector<double> g = returns_to_go(r, 0.97);
  EXPECT_NEAR(discounted_return(r, 0.97), g.front(), 1e-12);
  for (std::size_t t = 0; t + 1 < r.size(); ++t) EXPECT_NEAR(g[t], r[t] + 0.97 * g[t + 1], 1e-12);
}

TEST(Policy, FlattenRoundTripAndShapes) {
  const PolicyMLP p(PolicyConfig{3, 2, {16, 16}, PolicyHead::gaussian, -0.5, true, 1.0});
  EXPECT_EQ(p.dim(), 3 * 16 + 16 + 16 * 16 + 16 + 16 * 2 + 2 + 2);
  RngStream rng(94);
  const Vector theta = p.init_params(rng);
  EXPECT_EQ(p.layout().flatten(p.layout().unflatten(theta)), theta);
  EXPECT_EQ(p.log_std(theta), Vector::Constant(2, -0.5));
  EXPECT_TRUE(all_finite(p.mean(theta, random_vector(rng, 3, -10.0, 10.0))));
}

TEST(Policy, LogProbGradientMatchesFiniteDifferences) {
  const PolicyMLP p(PolicyConfig{2, 2, {5}, PolicyHead::gaussian, -0.3, true, 1.0});
  RngStream rng(95);
  const Vector theta = p.init_params(rng);
  const Vector s = random_vector(rng, 2), a = random_vector(rng, 2);
  const Vector g = p.log_prob_grad(theta, s, a);
  const double h = 1e-6;
  for (int i = 0; i < p.dim(); ++i) {
    Vector tp = theta, tm = theta;
    tp(i) += h;
    tm(i) -= h;
    EXPECT_NEAR(g(i), (p.log_prob(tp, s, a) - p.log_prob(tm, s, a)) / (2.0 * h), 1e-6);
  }
}

TEST(Reinforce, ConstantRewardsGiveNoGradient) {
  const ConstantRewardEnv env;
  PolicyConfig pc = linear_policy(PolicyHead::gaussian);
  pc.state_dim = 2;
  pc.action_dim = 1;
  const PolicyMLP p(pc);
  RngStream rng(96);
  const Vector theta = p.init_params(rng);
  const Vector g = policy_gradient_reinforce(env, p, theta, 100, 0.99, rng);
  // Scale: one unit advantage per step on a unit score.
  EXPECT_LE(g.norm(), 1e-10);
}

TEST(Reinforce, LandscapeReturnsAnalyticGradient) {
  const LandscapeEnv bowl = LandscapeEnv::bowl(4);
  const PolicyMLP p(linear_policy(PolicyHead::gaussian));
  RngStream rng(97);
  const Vector theta = random_vector(rng, 4);
  const Vector g = policy_gradient_reinforce(bowl, p, theta, 3, 0.99, rng);
  EXPECT_LE((g - bowl.gradient(theta)).norm(), 1e-6 * bowl.gradient(theta).norm());
}

TEST(Reinforce, SignAgreesWithAnalyticLqrGradient) {
  LqrSpec spec = LqrSpec::scalar(10, 0.0, 1.0);
  const double gamma = 0.99;
  const PolicyMLP p(linear_policy(PolicyHead::gaussian, std::log(0.3)));
  const LqrEnv env(spec);
  Vector theta = Vector::Zero(p.dim());
  theta(p.dim() - 1) = std::log(0.3);
  const double ascent = -lqr_theta_gradient(spec, theta, gamma, spec.horizon, 0.3)(0);
  ASSERT_LT(ascent, 0.0);  // pushing w negative lowers the cost
  int agree = 0;
  for (std::uint64_t draw = 0; draw < 100; ++draw) {
    RngStream rng(10000 + draw);
    const Vector g = policy_gradient_reinforce(env, p, theta, 32, gamma, rng);
    agree += (g(0) < 0.0) ? 1 : 0;
  }
  EXPECT_GE(agree, 95);
}

TEST(Reinforce, RequiresStochasticHead) {
  const LqrEnv env(LqrSpec::scalar());
  const PolicyMLP p(linear_policy(PolicyHead::deterministic));
  RngStream rng(98);
  EXPECT_THROW(policy_gradient_reinforce(env, p, p.init_params(rng), 4, 0.99, rng), BadDimensions);
}

TEST(LqrGradient, VanishesAtRiccatiGain) {
  LqrSpec spec = LqrSpec::scalar(400, 0.0, 1.0);
  const double gamma = 0.9;
  const Matrix gain = riccati_policy(spec, gamma);
  EXPECT_LE(lqr_cost_gradient(spec, gain, gamma, spec.horizon).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(LqrGradient, MatchesRolloutFiniteDifferences) {
  // Deterministic start s0 = 1: the expected cost equals one noiseless rollout.
  LqrSpec spec = LqrSpec::scalar(25, 0.0, 0.0);
  spec.init_mean = Vector::Constant(1, 1.0);
  const double gamma = 0.95;
  const double w = 0.0, b = 0.0;
  Matrix gain(1, 2);
  gain << w, b;
  EXPECT_NEAR(lqr_cost(spec, gain, gamma, spec.horizon), rollout_cost(spec, w, b, 1.0, gamma), 1e-10);
  const Matrix g = lqr_cost_gradient(spec, gain, gamma, spec.horizon);
  const double h = 1e-6;
  const double fd_w = (rollout_cost(spec, w + h, b, 1.0, gamma) - rollout_cost(spec, w - h, b, 1.0, gamma)) / (2 * h);
  const double fd_b = (rollout_cost(spec, w, b + h, 1.0, gamma) - rollout_cost(spec, w, b - h, 1.0, gamma)) / (2 * h);
  EXPECT_NEAR(g(0, 0), fd_w, 1e-6 * std::max(1.0, std::abs(fd_w)));
  EXPECT_NEAR(g(0, 1), fd_b, 1e-6 * std::max(1.0, std::abs(fd_b)));
}

TEST(LqrGradient, TwoDimensionalFixtureMatchesFiniteDifferences) {
  LqrSpec spec;
  spec.a = Matrix(2, 2);
  spec.a << 1.0, 0.1, 0.0, 0.9;
  spec.b = Matrix(2, 1);
  spec.b << 0.0, 0.5;
  spec.q = Matrix::Identity(2, 2);
  spec.r = Matrix::Identity(1, 1) * 0.1;
  spec.init_std = 0.7;
  spec.init_mean = Vector::Constant(2, 0.2);
  spec.horizon = 30;
  Matrix gain(1, 3);
  gain << -0.2, -0.4, 0.05;
  const Matrix g = lqr_cost_gradient(spec, gain, 0.97, spec.horizon, 0.2);
  const double h = 1e-6;
  for (int c = 0; c < 3; ++c) {
    Matrix p = gain, m = gain;
    p(0, c) += h;
    m(0, c) -= h;
    const double fd = (lqr_cost(spec, p, 0.97, spec.horizon, 0.2) - lqr_cost(spec, m, 0.97, spec.horizon, 0.2)) / (2 * h);
    EXPECT_NEAR(g(0, c), fd, 1e-6 * std::max(1.0, std::abs(fd)));
  }
}

TEST(LqrGradient, SymmetricUnderStateSignFlip) {
  LqrSpec spec = LqrSpec::scalar(20, 0.1, 1.0);
  Matrix gain(1, 2), flipped(1, 2);
  gain << -0.3, 0.2;
  flipped << -0.3, -0.2;
  const Matrix g = lqr_cost_gradient(spec, gain, 0.99, spec.horizon);
  const Matrix gf = lqr_cost_gradient(spec, flipped, 0.99, spec.horizon);
  EXPECT_NEAR(g(0, 0), gf(0, 0), 1e-12);
  EXPECT_NEAR(g(0, 1), -gf(0, 1), 1e-12);
}

TEST(ReplayBuffer, FifoEviction) {
  ReplayBuffer rb(3);
  for (int i = 0; i < 5; ++i) rb.push({Vector::Constant(1, i), Vector(), 0.0, Vector(), false});
  ASSERT_EQ(rb.size(), 3u);
  EXPECT_EQ(rb.at(0).state(0), 2.0);
  EXPECT_EQ(rb.at(2).state(0), 4.0);
}

TEST(ReplayBuffer, SamplesFromFilledRegion) {
  ReplayBuffer rb(100);
  for (int i = 0; i < 7; ++i) rb.push({Vector::Constant(1, i), Vector(), 0.0, Vector(), false});
  RngStream rng(99);
  for (std::size_t idx : rb.sample_indices(200, rng)) EXPECT_LT(idx, 7u);
}

TEST(ReplayBuffer, DeterministicAndEmptyRejected) {
  ReplayBuffer rb(10);
  RngStream rng(1);
  EXPECT_THROW(rb.sample_indices(1, rng), EmptyBuffer);
  for (int i = 0; i < 10; ++i) rb.push({Vector::Constant(1, i), Vector(), 0.0, Vector(), false});
  RngStream a(5), b(5);
  EXPECT_EQ(rb.sample_indices(20, a), rb.sample_indices(20, b));
}
