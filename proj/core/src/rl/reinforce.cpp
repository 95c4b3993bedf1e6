#include "rpg/rl/reinforce.hpp"

#include <algorithm>
#include <cmath>

#include "rpg/error.hpp"

namespace rpg::rl {

double Trajectory::discounted_return(double gamma) const {
  return rl::discounted_return(rewards, gamma);
}

double Trajectory::total_reward() const {
  double acc = 0.0;
  for (double r : rewards) acc += r;
  return acc;
}

double discounted_return(const std::vector<double>& rewards, double gamma) {
  double acc = 0.0;
  double discount = 1.0;
  for (double r : rewards) {
    acc += discount * r;
    discount *= gamma;
  }
  return acc;
}

std::vector<double> returns_to_go(const std::vector<double>& rewards, double gamma) {
  std::vector<double> g(rewards.size());
  double acc = 0.0;
  for (std::size_t t = rewards.size(); t-- > 0;) {
    acc = rewards[t] + gamma * acc;
    g[t] = acc;
  }
  return g;
}

Trajectory rollout(const Environment& env, const PolicyMLP& policy, const Vector& theta,
                   RngStream& rng, const Vector* start) {
  Trajectory traj;
  Vector s = start != nullptr ? *start : env.reset(rng);
  for (int t = 0; t < env.horizon(); ++t) {
    const Vector a = policy.act(theta, s, rng);
    StepResult next = env.step(s, a, rng);
    traj.states.push_back(s);
    traj.actions.push_back(a);
    traj.rewards.push_back(next.reward);
    if (policy.stochastic()) traj.log_probs.push_back(policy.log_prob(theta, s, a));
    s = std::move(next.state);
    if (next.done) break;
  }
  return traj;
}

Vector policy_gradient_reinforce(const Environment& env, const PolicyMLP& policy,
                                 const Vector& theta, int episodes, double gamma, RngStream& rng,
                                 const std::vector<Vector>* start_states) {
  if (const LandscapeEnv* land = env.as_landscape()) return land->gradient(theta);
  if (!policy.stochastic()) throw BadDimensions("reinforce: needs the gaussian policy head");
  if (episodes < 1) throw BadDimensions("reinforce: episodes must be >= 1");
  if (start_states != nullptr && start_states->empty()) throw BadDimensions("reinforce: empty start set");

  std::vector<Trajectory> trajs;
  std::vector<std::vector<double>> rtg;
  trajs.reserve(static_cast<std::size_t>(episodes));
  std::size_t longest = 0;
  for (int e = 0; e < episodes; ++e) {
    const Vector* start =
        start_states != nullptr ? &(*start_states)[static_cast<std::size_t>(e) % start_states->size()]
                                : nullptr;
    trajs.push_back(rollout(env, policy, theta, rng, start));
    rtg.push_back(returns_to_go(trajs.back().rewards, gamma));
    longest = std::max(longest, trajs.back().length());
  }

  std::vector<double> baseline(longest, 0.0);
  std::vector<int> counts(longest, 0);
  for (const auto& g : rtg) {
    for (std::size_t t = 0; t < g.size(); ++t) {
      baseline[t] += g[t];
      ++counts[t];
    }
  }
  for (std::size_t t = 0; t < longest; ++t) baseline[t] /= counts[t];

  Vector grad = Vector::Zero(policy.dim());
  for (std::size_t e = 0; e < trajs.size(); ++e) {
    const Trajectory& tr = trajs[e];
    double discount = 1.0;
    for (std::size_t t = 0; t < tr.length(); ++t) {
      const double adv = rtg[e][t] - baseline[t];
      if (adv != 0.0) grad += discount * adv * policy.log_prob_grad(theta, tr.states[t], tr.actions[t]);
      discount *= gamma;
    }
  }
  return grad / static_cast<double>(episodes);
}

}  // namespace rpg::rl
