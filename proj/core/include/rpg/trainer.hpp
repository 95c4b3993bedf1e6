#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rpg/divergence.hpp"
#include "rpg/geodesic.hpp"
#include "rpg/metric_net.hpp"
#include "rpg/rl/environment.hpp"
#include "rpg/rl/policy.hpp"

namespace rpg {

enum class Variant { baseline, j, t };
enum class GradientBackend { analytic, reinforce };
enum class PolicyOptimizer { sgd, adam };

const char* to_string(Variant v);
const char* to_string(GradientBackend b);
const char* to_string(PolicyOptimizer o);

struct TrainConfig {
  rl::EnvSpec env;
  // The defaults (lqr + analytic) need a linear deterministic policy.
  rl::PolicyConfig policy{.hidden = {}, .head = rl::PolicyHead::deterministic};
  GradientBackend backend = GradientBackend::analytic;
  Variant variant = Variant::baseline;

  int total_steps = 3000;
  int update_interval = 50;
  double alpha = 0.01;
  // sgd: theta += alpha * direction. adam: alpha is the Adam step size
  // (betas 0.9 / 0.999, eps 1e-8), state kept across updates.
  PolicyOptimizer optimizer = PolicyOptimizer::sgd;
  double gamma = 0.99;

  int episodes = 16;    // REINFORCE episodes per gradient estimate
  int batch_size = 16;  // replay states used as episode starts
  int buffer_capacity = 100000;
  int eval_episodes = 10;
  double action_noise = 0.0;     // exploration std for a deterministic head
  double landscape_init = 1.0;   // landscape theta_0 ~ U(+-landscape_init)

  ProbeConfig probes;       // seed is re-derived every update
  MetricNetConfig metric;   // m_tilde <= 0 selects default_m_tilde(n)
  int metric_iters = 20;
  AdamConfig adam;
  double kappa = 0.1;
  std::optional<bool> gate;  // unset: on for variant T only
  bool freeze_metric = false;
  bool record_theta = false;
  std::uint64_t seed = 0;

  bool gate_enabled() const { return gate.value_or(variant == Variant::t); }

  /// Throws BadDimensions naming the offending field.
  void validate() const;
};

struct RegularizeConfig {
  Variant variant = Variant::j;
  bool gate_enabled = false;
  ProbeConfig metric_probes;  // Algorithm 1 probes
  ProbeConfig report_probes;  // divergence / Hessian-trace report probes
  int metric_iters = 20;
  AdamConfig adam;
  double kappa = 0.1;
  bool freeze_metric = false;
};

struct RegularizeResult {
  Vector direction;
  DivergenceReport report;
  double ratio_before = 1.0;
  MetricNetParams phi;
  bool gated = false;      // direction fell back to the plain gradient
  bool nonfinite = false;  // a field evaluation failed; direction = grad
  int metric_iters_run = 0;
};

/// One Algorithm-1 pass followed by direction selection and optional gating.
RegularizeResult regularize_step(const MetricNet& net, const Vector& theta, const Vector& grad,
                                 const VectorField& grad_fn, const MetricNetParams& phi,
                                 const RegularizeConfig& cfg);

struct StepRecord {
  int update = 0;
  long long step = 0;  // environment steps consumed so far
  double eval_return = 0.0;
  double div = 0.0;
  double hessian_trace = 0.0;
  double ratio = 0.0;
  double ratio_before = 0.0;
  bool gate = false;
  bool nonfinite = false;
  double wall_ms = 0.0;
};

struct RunSummary {
  TrainConfig config;
  std::vector<StepRecord> records;
  double final_return = 0.0;
  double best_return = 0.0;
  double ratio_below_one = 0.0;  // fraction of updates with ratio < 1
  Vector final_theta;
  std::vector<Vector> theta_history;  // theta after each update when record_theta
  std::optional<double> final_cost;   // LQR: expected cost of the final mean policy
  std::optional<double> riccati_cost;  // LQR: same quantity for the Riccati gain
  std::shared_ptr<const MetricNet> metric_net;
  MetricNetParams phi;
  bool aborted = false;
  std::string abort_reason;
};

using RecordSink = std::function<void(const StepRecord&)>;

/// Algorithm 2. Deterministic given cfg.seed.
RunSummary run_training(const TrainConfig& cfg, const RecordSink& sink = {});

/// Fraction of records with ratio < 1 (0 for an empty list).
double ratio_below_one(const std::vector<StepRecord>& records);

}  // namespace rpg
