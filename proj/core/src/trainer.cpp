#include "rpg/trainer.hpp"

#include <chrono>
#include <cmath>
#include <string>
#include <utility>

#include "rpg/error.hpp"
#include "rpg/metric_field.hpp"
#include "rpg/rl/lqr.hpp"
#include "rpg/rl/reinforce.hpp"
#include "rpg/rl/replay_buffer.hpp"

namespace rpg {

namespace {

// Substream keys; each purpose gets its own stream so that, for example,
// skipping Algorithm 1 never shifts the environment noise.
constexpr std::uint64_t kInitKey = 1;
constexpr std::uint64_t kMetricInitKey = 2;
constexpr std::uint64_t kEnvKey = 3;
constexpr std::uint64_t kGradKey = 4;
constexpr std::uint64_t kMetricProbeKey = 5;
constexpr std::uint64_t kReportProbeKey = 6;
constexpr std::uint64_t kEvalKey = 7;

std::uint64_t derived_seed(const RngStream& root, std::uint64_t key, int update) {
  RngStream s = root.substream(key).substream(static_cast<std::uint64_t>(update));
  return s.next_u64();
}

void require(bool ok, const std::string& message) {
  if (!ok) throw BadDimensions("config: " + message);
}

}  // namespace

const char* to_string(Variant v) {
  switch (v) {
    case Variant::baseline:
      return "baseline";
    case Variant::j:
      return "J";
    case Variant::t:
      return "T";
  }
  return "unknown";
}

const char* to_string(GradientBackend b) {
  return b == GradientBackend::analytic ? "analytic" : "reinforce";
}

const char* to_string(PolicyOptimizer o) { return o == PolicyOptimizer::sgd ? "sgd" : "adam"; }

void TrainConfig::validate() const {
  require(total_steps >= 1, "total_steps must be >= 1, got " + std::to_string(total_steps));
  require(update_interval >= 1, "update_interval must be >= 1, got " + std::to_string(update_interval));
  require(total_steps >= update_interval, "total_steps must be >= update_interval");
  require(alpha > 0.0 && std::isfinite(alpha), "alpha must be positive, got " + std::to_string(alpha));
  require(gamma > 0.0 && gamma <= 1.0, "gamma must be in (0, 1], got " + std::to_string(gamma));
  require(episodes >= 1, "episodes must be >= 1");
  require(batch_size >= 1, "batch_size must be >= 1");
  require(buffer_capacity >= 1, "buffer_capacity must be >= 1");
  require(eval_episodes >= 1, "eval_episodes must be >= 1");
  require(action_noise >= 0.0, "action_noise must be non-negative");
  require(probes.probe_count >= 1, "probe_count must be >= 1");
  require(metric_iters >= 1, "metric_iters must be >= 1");
  require(kappa >= 0.0 && std::isfinite(kappa), "kappa must be non-negative");
  require(adam.lr > 0.0, "metric_lr must be positive");
  const bool landscape = env.kind == rl::EnvKind::landscape_quadratic ||
                         env.kind == rl::EnvKind::landscape_rosenbrock;
  if (landscape) {
    require(env.landscape_dim >= 2, "landscape_dim must be >= 2");
  } else if (backend == GradientBackend::analytic) {
    require(env.kind == rl::EnvKind::lqr, "analytic gradients are only available for lqr and landscape envs");
    require(policy.hidden.empty(), "analytic lqr gradients need a linear policy (hidden = none)");
    require(policy.head == rl::PolicyHead::deterministic,
            "analytic lqr gradients need the deterministic head (use action_noise for exploration)");
  } else {
    require(policy.head == rl::PolicyHead::gaussian, "reinforce needs the gaussian head");
  }
}

double ratio_below_one(const std::vector<StepRecord>& records) {
  if (records.empty()) return 0.0;
  std::size_t below = 0;
  for (const StepRecord& r : records) below += r.ratio < 1.0 ? 1 : 0;
  return static_cast<double>(below) / static_cast<double>(records.size());
}

RegularizeResult regularize_step(const MetricNet& net, const Vector& theta, const Vector& grad,
                                 const VectorField& grad_fn, const MetricNetParams& phi,
                                 const RegularizeConfig& cfg) {
  RegularizeResult out;
  out.phi = phi;
  out.direction = grad;
  const int n = static_cast<int>(theta.size());
  const double h = cfg.report_probes.step_for(theta);

  try {
    const std::vector<Vector> probes = draw_probes(cfg.report_probes, n);
    const double trace = hessian_trace_hutchinson(grad_fn, theta, probes, h);
    auto report_for = [&](const VectorField& u_fn) {
      DivergenceReport r;
      r.div = divergence_estimate(FieldEvaluator{grad_fn, u_fn, n}, theta, probes, h);
      r.hessian_trace = trace;
      r.ratio = divergence_ratio(r.div, trace);
      r.probe_count = cfg.report_probes.probe_count;
      r.fd_step = h;
      r.seed = cfg.report_probes.seed;
      return r;
    };

    if (cfg.variant == Variant::baseline) {
      out.report = report_for([n](const Vector&) { return Vector(Vector::Zero(n)); });
      out.ratio_before = out.report.ratio;
      return out;
    }

    out.ratio_before = report_for(net.u_field(phi)).ratio;
    if (!cfg.freeze_metric) {
      MetricTrainResult trained =
          train_metric_net(net, phi, theta, grad_fn, cfg.metric_probes, cfg.metric_iters, cfg.adam);
      out.phi = std::move(trained.params);
      out.metric_iters_run = static_cast<int>(trained.history.size()) - 1;
    }

    const VectorField u_fn = net.u_field(out.phi);
    const MetricPoint mp(eval_checked(u_fn, theta, "u_fn"));
    const Vector j = regularized_gradient(mp, grad);
    out.report = report_for(u_fn);
    Vector direction = j;
    if (cfg.variant == Variant::t) direction = geodesic_gradient(u_fn, theta, j, {cfg.kappa, h});
    if (!all_finite(direction)) throw NonFiniteField("regularize_step: non-finite direction");

    if (cfg.gate_enabled && out.report.ratio >= 1.0) {
      out.gated = true;
    } else {
      out.direction = std::move(direction);
    }
  } catch (const NonFiniteField&) {
    out.direction = grad;
    out.gated = true;
    out.nonfinite = true;
  }
  return out;
}

RunSummary run_training(const TrainConfig& cfg, const RecordSink& sink) {
  cfg.validate();
  RunSummary summary;
  summary.config = cfg;

  const std::unique_ptr<rl::Environment> env = rl::make_env(cfg.env);
  const rl::LandscapeEnv* land = env->as_landscape();
  const RngStream root(cfg.seed);

  std::optional<rl::PolicyMLP> policy;
  LayerLayout layout;
  Vector theta;
  {
    RngStream init = root.substream(kInitKey);
    if (land != nullptr) {
      layout = LayerLayout::single_vector(land->dim());
      theta.resize(land->dim());
      for (Eigen::Index i = 0; i < theta.size(); ++i) {
        theta(i) = init.uniform(-cfg.landscape_init, cfg.landscape_init);
      }
    } else {
      rl::PolicyConfig pc = cfg.policy;
      pc.state_dim = env->state_dim();
      pc.action_dim = env->action_dim();
      policy.emplace(pc);
      layout = policy->layout();
      theta = policy->init_params(init);
    }
  }
  const int n = layout.dim();
  if (n < 2) throw BadDimensions("config: the policy needs at least 2 parameters");

  MetricNetConfig mc = cfg.metric;
  if (mc.m_tilde <= 0) mc.m_tilde = default_m_tilde(n);
  if (mc.m_tilde >= n) mc.m_tilde = n - 1;
  auto net = std::make_shared<const MetricNet>(layout, mc);
  MetricNetParams phi;
  {
    RngStream init = root.substream(kMetricInitKey);
    phi = net->init_params(init);
  }

  const rl::LqrEnv* lqr = dynamic_cast<const rl::LqrEnv*>(env.get());
  const bool analytic_lqr = lqr != nullptr && cfg.backend == GradientBackend::analytic;

  rl::ReplayBuffer buffer(static_cast<std::size_t>(cfg.buffer_capacity));
  RngStream env_rng = root.substream(kEnvKey);
  Vector state;
  int episode_t = 0;
  if (land == nullptr) state = env->reset(env_rng);

  auto collect = [&]() {
    for (int k = 0; k < cfg.update_interval; ++k) {
      Vector action;
      if (policy->stochastic()) {
        action = policy->act(theta, state, env_rng);
      } else {
        action = policy->mean(theta, state);
        for (Eigen::Index i = 0; i < action.size(); ++i) action(i) += cfg.action_noise * env_rng.normal();
      }
      rl::StepResult next = env->step(state, action, env_rng);
      ++episode_t;
      const bool done = next.done || episode_t >= env->horizon();
      buffer.push({state, action, next.reward, next.state, done});
      if (done) {
        state = env->reset(env_rng);
        episode_t = 0;
      } else {
        state = std::move(next.state);
      }
    }
  };

  auto make_grad_fn = [&](int update) -> VectorField {
    if (land != nullptr) return [land](const Vector& th) { return land->gradient(th); };
    if (analytic_lqr) {
      const rl::LqrSpec spec = lqr->spec();
      const double gamma = cfg.gamma;
      const double noise = cfg.action_noise;
      return [spec, gamma, noise](const Vector& th) {
        return Vector(-rl::lqr_theta_gradient(spec, th, gamma, spec.horizon, noise));
      };
    }
    RngStream pick = root.substream(kGradKey).substream(static_cast<std::uint64_t>(update));
    std::vector<Vector> starts;
    for (const rl::Transition& t : buffer.sample(static_cast<std::size_t>(cfg.batch_size), pick)) {
      starts.push_back(t.state);
    }
    const std::uint64_t rollout_seed = pick.next_u64();
    const rl::Environment* e = env.get();
    const rl::PolicyMLP* p = &*policy;
    const int episodes = cfg.episodes;
    const double gamma = cfg.gamma;
    // Common random numbers: every evaluation replays the same noise, so the
    // estimate is a smooth function of theta and finite differences are usable.
    return [e, p, starts, rollout_seed, episodes, gamma](const Vector& th) {
      RngStream r(rollout_seed);
      return rl::policy_gradient_reinforce(*e, *p, th, episodes, gamma, r, &starts);
    };
  };

  auto evaluate = [&](int update) {
    if (land != nullptr) return land->value(theta);
    RngStream eval = root.substream(kEvalKey).substream(static_cast<std::uint64_t>(update));
    double total = 0.0;
    for (int e = 0; e < cfg.eval_episodes; ++e) {
      Vector s = env->reset(eval);
      for (int t = 0; t < env->horizon(); ++t) {
        rl::StepResult next = env->step(s, policy->mean(theta, s), eval);
        total += next.reward;
        s = std::move(next.state);
        if (next.done) break;
      }
    }
    return total / cfg.eval_episodes;
  };

  Vector adam_m = Vector::Zero(n);
  Vector adam_v = Vector::Zero(n);
  int adam_t = 0;

  long long steps = 0;
  const int updates = cfg.total_steps / cfg.update_interval;
  for (int update = 0; update < updates; ++update) {
    const auto start = std::chrono::steady_clock::now();
    if (land == nullptr) collect();
    steps += cfg.update_interval;

    const VectorField grad_fn = make_grad_fn(update);
    RegularizeConfig rc;
    rc.variant = cfg.variant;
    rc.gate_enabled = cfg.gate_enabled();
    rc.metric_probes = cfg.probes;
    rc.metric_probes.seed = derived_seed(root, kMetricProbeKey, update);
    rc.report_probes = cfg.probes;
    rc.report_probes.seed = derived_seed(root, kReportProbeKey, update);
    rc.metric_iters = cfg.metric_iters;
    rc.adam = cfg.adam;
    rc.kappa = cfg.kappa;
    rc.freeze_metric = cfg.freeze_metric;

    Vector grad;
    try {
      grad = eval_checked(grad_fn, theta, "grad_fn");
    } catch (const NonFiniteField& e) {
      summary.aborted = true;
      summary.abort_reason = e.what();
      break;
    }
    RegularizeResult rr = regularize_step(*net, theta, grad, grad_fn, phi, rc);
    phi = std::move(rr.phi);
    if (cfg.optimizer == PolicyOptimizer::adam) {
      ++adam_t;
      adam_m = 0.9 * adam_m + 0.1 * rr.direction;
      adam_v = 0.999 * adam_v + 0.001 * rr.direction.cwiseProduct(rr.direction);
      const double c1 = 1.0 - std::pow(0.9, adam_t);
      const double c2 = 1.0 - std::pow(0.999, adam_t);
      theta.array() += cfg.alpha * (adam_m.array() / c1) / ((adam_v.array() / c2).sqrt() + 1e-8);
    } else {
      theta += cfg.alpha * rr.direction;
    }

    StepRecord rec;
    rec.update = update;
    rec.step = steps;
    rec.div = rr.report.div;
    rec.hessian_trace = rr.report.hessian_trace;
    rec.ratio = rr.report.ratio;
    rec.ratio_before = rr.ratio_before;
    rec.gate = rr.gated;
    rec.nonfinite = rr.nonfinite;
    if (!all_finite(theta)) {
      summary.aborted = true;
      summary.abort_reason = "non-finite policy parameters after update " + std::to_string(update);
      rec.eval_return = std::nan("");
    } else {
      rec.eval_return = evaluate(update);
    }
    rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    summary.records.push_back(rec);
    if (cfg.record_theta) summary.theta_history.push_back(theta);
    if (sink) sink(rec);
    if (summary.aborted) break;
  }

  summary.final_theta = theta;
  summary.metric_net = net;
  summary.phi = phi;
  summary.ratio_below_one = ratio_below_one(summary.records);
  if (!summary.records.empty()) {
    summary.final_return = summary.records.back().eval_return;
    summary.best_return = summary.records.front().eval_return;
    for (const StepRecord& r : summary.records) {
      if (r.eval_return > summary.best_return) summary.best_return = r.eval_return;
    }
  }
  if (lqr != nullptr && cfg.policy.hidden.empty() && all_finite(theta)) {
    const rl::LqrSpec& spec = lqr->spec();
    summary.final_cost = rl::lqr_cost(spec, rl::lqr_gain_from_theta(spec, theta), cfg.gamma, spec.horizon);
    summary.riccati_cost = rl::lqr_cost(spec, rl::riccati_policy(spec, cfg.gamma), cfg.gamma, spec.horizon);
  }
  return summary;
}

}  // namespace rpg
