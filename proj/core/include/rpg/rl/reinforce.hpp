#pragma once

#include <vector>

#include "rpg/linalg.hpp"
#include "rpg/rl/environment.hpp"
#include "rpg/rl/policy.hpp"
#include "rpg/rng.hpp"

namespace rpg::rl {

struct Trajectory {
  std::vector<Vector> states;  // s_0 .. s_{T-1}
  std::vector<Vector> actions;
  std::vector<double> rewards;
  std::vector<double> log_probs;  // empty for a deterministic policy

  std::size_t length() const { return rewards.size(); }
  double discounted_return(double gamma) const;
  double total_reward() const;
};

/// sum_t gamma^t r_t, accumulated forwards.
double discounted_return(const std::vector<double>& rewards, double gamma);

/// G_t = sum_{k >= t} gamma^{k-t} r_k, accumulated backwards.
std::vector<double> returns_to_go(const std::vector<double>& rewards, double gamma);

/// One episode of at most env.horizon() steps from `start` (or env.reset()).
Trajectory rollout(const Environment& env, const PolicyMLP& policy, const Vector& theta,
                   RngStream& rng, const Vector* start = nullptr);

/// Ascent gradient of the expected discounted return. REINFORCE with
/// return-to-go and a per-timestep mean-return baseline, averaged over
/// `episodes`. Episode e starts from start_states[e % size] when given.
/// Landscape environments return their analytic gradient.
Vector policy_gradient_reinforce(const Environment& env, const PolicyMLP& policy,
                                 const Vector& theta, int episodes, double gamma, RngStream& rng,
                                 const std::vector<Vector>* start_states = nullptr);

}  // namespace rpg::rl
