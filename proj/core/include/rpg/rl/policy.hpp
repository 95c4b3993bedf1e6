#pragma once

#include <span>
#include <vector>

#include "rpg/autodiff.hpp"
#include "rpg/layout.hpp"
#include "rpg/linalg.hpp"
#include "rpg/rng.hpp"

namespace rpg::rl {

enum class PolicyHead { gaussian, deterministic };

struct PolicyConfig {
  int state_dim = 1;
  int action_dim = 1;
  std::vector<int> hidden = {16, 16};  // empty gives the linear policy a = W s + b
  PolicyHead head = PolicyHead::gaussian;
  double init_log_std = -0.5;
  bool learn_log_std = true;  // false: log-std fixed at init_log_std, not part of theta
  double init_scale = 1.0;    // weights ~ U(+-init_scale / sqrt(fan_in)), biases 0
};

/// tanh MLP over a flat parameter vector laid out as
/// [w1, b1, ..., w_out, b_out, (log_std)].
class PolicyMLP {
 public:
  explicit PolicyMLP(PolicyConfig cfg);

  const PolicyConfig& config() const { return cfg_; }
  const LayerLayout& layout() const { return layout_; }
  int dim() const { return layout_.dim(); }
  bool stochastic() const { return cfg_.head == PolicyHead::gaussian; }

  Vector init_params(RngStream& rng) const;

  Vector mean(const Vector& theta, const Vector& state) const;
  Vector log_std(const Vector& theta) const;

  /// Gaussian sample for the stochastic head, the mean otherwise.
  Vector act(const Vector& theta, const Vector& state, RngStream& rng) const;

  double log_prob(const Vector& theta, const Vector& state, const Vector& action) const;

  /// d log pi(action | state) / d theta.
  Vector log_prob_grad(const Vector& theta, const Vector& state, const Vector& action) const;

  template <class T>
  std::vector<T> mean_generic(std::span<const T> theta, const Vector& state) const;

 private:
  PolicyConfig cfg_;
  LayerLayout layout_;
  int log_std_offset_ = -1;
};

template <class T>
std::vector<T> PolicyMLP::mean_generic(std::span<const T> theta, const Vector& state) const {
  using std::tanh;
  std::vector<T> x(static_cast<std::size_t>(state.size()));
  for (Eigen::Index i = 0; i < state.size(); ++i) x[static_cast<std::size_t>(i)] = state(i);
  const auto& segs = layout_.segments();
  const std::size_t layers = cfg_.hidden.size() + 1;
  for (std::size_t l = 0; l < layers; ++l) {
    const Segment& w = segs[2 * l];
    const Segment& b = segs[2 * l + 1];
    std::vector<T> y(static_cast<std::size_t>(w.rows));
    for (int r = 0; r < w.rows; ++r) {
      T acc = theta[static_cast<std::size_t>(b.offset + r)];
      for (int c = 0; c < w.cols; ++c) {
        acc += theta[static_cast<std::size_t>(w.offset + r * w.cols + c)] * x[static_cast<std::size_t>(c)];
      }
      y[static_cast<std::size_t>(r)] = l + 1 < layers ? tanh(acc) : acc;
    }
    x = std::move(y);
  }
  return x;
}

}  // namespace rpg::rl
