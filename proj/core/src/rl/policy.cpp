#include "rpg/rl/policy.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "rpg/error.hpp"

namespace rpg::rl {

PolicyMLP::PolicyMLP(PolicyConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.state_dim < 1 || cfg_.action_dim < 1) throw BadDimensions("policy: empty state or action");
  int fan_in = cfg_.state_dim;
  for (std::size_t l = 0; l < cfg_.hidden.size(); ++l) {
    const int width = cfg_.hidden[l];
    if (width < 1) throw BadDimensions("policy: hidden widths must be positive");
    layout_.add_matrix("w" + std::to_string(l + 1), width, fan_in);
    layout_.add_vector("b" + std::to_string(l + 1), width);
    fan_in = width;
  }
  layout_.add_matrix("w_out", cfg_.action_dim, fan_in);
  layout_.add_vector("b_out", cfg_.action_dim, /*pool_exempt=*/true);
  if (stochastic() && cfg_.learn_log_std) {
    log_std_offset_ = layout_.dim();
    layout_.add_vector("log_std", cfg_.action_dim);
  }
}

Vector PolicyMLP::init_params(RngStream& rng) const {
  Vector theta = Vector::Zero(dim());
  for (const Segment& s : layout_.segments()) {
    if (s.kind != SegmentKind::matrix) continue;
    const double scale = cfg_.init_scale / std::sqrt(static_cast<double>(s.cols));
    for (int i = 0; i < s.size(); ++i) theta(s.offset + i) = rng.uniform(-scale, scale);
  }
  if (log_std_offset_ >= 0) theta.segment(log_std_offset_, cfg_.action_dim).setConstant(cfg_.init_log_std);
  return theta;
}

Vector PolicyMLP::mean(const Vector& theta, const Vector& state) const {
  if (theta.size() != dim()) throw LayoutMismatch("policy: theta has the wrong length");
  if (state.size() != cfg_.state_dim) throw BadDimensions("policy: state has the wrong length");
  const std::vector<double> m =
      mean_generic<double>({theta.data(), static_cast<std::size_t>(theta.size())}, state);
  return Eigen::Map<const Vector>(m.data(), static_cast<Eigen::Index>(m.size()));
}

Vector PolicyMLP::log_std(const Vector& theta) const {
  if (log_std_offset_ >= 0) return theta.segment(log_std_offset_, cfg_.action_dim);
  return Vector::Constant(cfg_.action_dim, cfg_.init_log_std);
}

Vector PolicyMLP::act(const Vector& theta, const Vector& state, RngStream& rng) const {
  Vector a = mean(theta, state);
  if (!stochastic()) return a;
  const Vector ls = log_std(theta);
  for (Eigen::Index i = 0; i < a.size(); ++i) a(i) += std::exp(ls(i)) * rng.normal();
  return a;
}

double PolicyMLP::log_prob(const Vector& theta, const Vector& state, const Vector& action) const {
  if (!stochastic()) throw BadDimensions("policy: log_prob needs the gaussian head");
  const Vector m = mean(theta, state);
  const Vector ls = log_std(theta);
  double lp = 0.0;
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const double z = (action(i) - m(i)) * std::exp(-ls(i));
    lp += -0.5 * z * z - ls(i) - 0.5 * std::log(2.0 * std::numbers::pi);
  }
  return lp;
}

Vector PolicyMLP::log_prob_grad(const Vector& theta, const Vector& state,
                                const Vector& action) const {
  using ad::Var;
  if (!stochastic()) throw BadDimensions("policy: log_prob_grad needs the gaussian head");
  if (theta.size() != dim()) throw LayoutMismatch("policy: theta has the wrong length");
  ad::Tape tape;
  std::vector<Var> p;
  p.reserve(static_cast<std::size_t>(dim()));
  for (Eigen::Index i = 0; i < theta.size(); ++i) p.push_back(tape.parameter(theta(i)));
  const std::vector<Var> m = mean_generic<Var>(p, state);
  Var lp = 0.0;
  for (int i = 0; i < cfg_.action_dim; ++i) {
    const Var ls = log_std_offset_ >= 0 ? p[static_cast<std::size_t>(log_std_offset_ + i)]
                                        : Var(cfg_.init_log_std);
    const Var z = (action(i) - m[static_cast<std::size_t>(i)]) * exp(-ls);
    lp += -0.5 * z * z - ls;
  }
  return tape.gradient(lp);
}

}  // namespace rpg::rl
