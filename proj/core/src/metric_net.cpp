#include "rpg/metric_net.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "rpg/metric_field.hpp"

namespace rpg {

const char* to_string(BlockTag tag) {
  switch (tag) {
    case BlockTag::shared:
      return "shared";
    case BlockTag::omega_head:
      return "omega_head";
    case BlockTag::sigma_head:
      return "sigma_head";
  }
  return "unknown";
}

bool MetricNetParams::heads_zero() const {
  for (const ParamBlock& b : blocks) {
    if (b.tag == BlockTag::shared) continue;
    if (values.segment(b.offset, b.size).cwiseAbs().maxCoeff() != 0.0) return false;
  }
  return true;
}

MetricNet::MetricNet(LayerLayout layout, MetricNetConfig cfg)
    : layout_(std::move(layout)), cfg_(cfg) {
  const int n = layout_.dim();
  if (cfg_.m_tilde < 1 || cfg_.m_tilde >= n) {
    throw BadDimensions("metric net: need 1 <= m_tilde < n (n=" + std::to_string(n) +
                        ", m_tilde=" + std::to_string(cfg_.m_tilde) + ")");
  }
  if (cfg_.kernel_size < 1 || cfg_.pool_size < 1 || cfg_.segment_width < 1 ||
      cfg_.trunk_width < 1) {
    throw BadDimensions("metric net: kernel, pool and widths must be positive");
  }
  fp_ = std::make_shared<const FourierPair>(build_fourier_pair(n, cfg_.m_tilde));

  const int k = cfg_.kernel_size;
  const int min_extent = 2 * (k - 1) + 1;  // smallest input that survives two valid convolutions
  for (const Segment& seg : layout_.segments()) {
    SegmentPlan p;
    p.seg = seg;
    p.pad_rows = std::max(seg.rows, min_extent);
    p.kernel_rows = k;
    if (seg.kind == SegmentKind::matrix) {
      p.pad_cols = std::max(seg.cols, min_extent);
      p.kernel_cols = k;
    } else {
      p.pad_cols = 1;
      p.kernel_cols = 1;
    }
    p.out_rows = p.pad_rows - 2 * (p.kernel_rows - 1);
    p.out_cols = p.pad_cols - 2 * (p.kernel_cols - 1);
    const int flat = p.out_rows * p.out_cols;
    p.pooled = seg.pool_exempt ? flat : (flat + cfg_.pool_size - 1) / cfg_.pool_size;

    const int kernel = p.kernel_rows * p.kernel_cols;
    p.conv1 = add_block(seg.name + ".conv1", BlockTag::shared, kernel);
    p.conv1_bias = add_block(seg.name + ".conv1_bias", BlockTag::shared, 1);
    p.conv2 = add_block(seg.name + ".conv2", BlockTag::shared, kernel);
    p.conv2_bias = add_block(seg.name + ".conv2_bias", BlockTag::shared, 1);
    p.dense = add_block(seg.name + ".dense", BlockTag::shared, cfg_.segment_width * p.pooled);
    p.dense_bias = add_block(seg.name + ".dense_bias", BlockTag::shared, cfg_.segment_width);
    plans_.push_back(p);
  }
  const int features = static_cast<int>(plans_.size()) * cfg_.segment_width;
  trunk_ = add_block("trunk", BlockTag::shared, cfg_.trunk_width * features);
  trunk_bias_ = add_block("trunk_bias", BlockTag::shared, cfg_.trunk_width);
  omega_ = add_block("omega_head", BlockTag::omega_head, cfg_.m_tilde * cfg_.trunk_width);
  omega_bias_ = add_block("omega_head_bias", BlockTag::omega_head, cfg_.m_tilde);
  sigma_ = add_block("sigma_head", BlockTag::sigma_head, cfg_.m_tilde * cfg_.trunk_width);
  sigma_bias_ = add_block("sigma_head_bias", BlockTag::sigma_head, cfg_.m_tilde);
}

int MetricNet::add_block(const std::string& name, BlockTag tag, int size) {
  const int offset = total_;
  blocks_.push_back({name, tag, offset, size});
  total_ += size;
  return offset;
}

void MetricNet::check_sizes(std::size_t phi, std::size_t theta) const {
  if (phi != static_cast<std::size_t>(total_)) {
    throw LayoutMismatch("metric net: expected " + std::to_string(total_) +
                         " network parameters, got " + std::to_string(phi));
  }
  if (theta != static_cast<std::size_t>(layout_.dim())) {
    throw LayoutMismatch("metric net: expected theta of length " + std::to_string(layout_.dim()) +
                         ", got " + std::to_string(theta));
  }
}

MetricNetParams MetricNet::init_params(RngStream& rng) const {
  MetricNetParams phi;
  phi.blocks = blocks_;
  phi.values = Vector::Zero(total_);
  auto fill = [&](int offset, int size, double scale) {
    for (int i = 0; i < size; ++i) phi.values(offset + i) = rng.uniform(-scale, scale);
  };
  const int features = static_cast<int>(plans_.size()) * cfg_.segment_width;
  for (const SegmentPlan& p : plans_) {
    const int kernel = p.kernel_rows * p.kernel_cols;
    fill(p.conv1, kernel, cfg_.init_scale / std::sqrt(static_cast<double>(kernel)));
    fill(p.conv1_bias, 1, cfg_.bias_scale);
    fill(p.conv2, kernel, cfg_.init_scale / std::sqrt(static_cast<double>(kernel)));
    fill(p.conv2_bias, 1, cfg_.bias_scale);
    fill(p.dense, cfg_.segment_width * p.pooled,
         cfg_.init_scale / std::sqrt(static_cast<double>(p.pooled)));
    fill(p.dense_bias, cfg_.segment_width, cfg_.bias_scale);
  }
  fill(trunk_, cfg_.trunk_width * features,
       cfg_.init_scale / std::sqrt(static_cast<double>(features)));
  fill(trunk_bias_, cfg_.trunk_width, cfg_.bias_scale);
  return phi;
}

MetricNetParams init_params(RngStream& rng, const MetricNetConfig& cfg, const LayerLayout& layout) {
  return MetricNet(layout, cfg).init_params(rng);
}

namespace {

std::span<const double> as_span(const Vector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<ad::Var> constants(const Vector& x) {
  std::vector<ad::Var> out(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) out[static_cast<std::size_t>(i)] = ad::Var(x(i));
  return out;
}

std::vector<ad::Var> leaves(ad::Tape& tape, const Vector& phi) {
  std::vector<ad::Var> out;
  out.reserve(static_cast<std::size_t>(phi.size()));
  for (Eigen::Index i = 0; i < phi.size(); ++i) out.push_back(tape.parameter(phi(i)));
  return out;
}

}  // namespace

TransformParams MetricNet::forward(const MetricNetParams& phi, const Vector& theta) const {
  const NetOutput<double> out = forward_generic<double>(as_span(phi.values), as_span(theta));
  return {to_vector(out.omega_tilde), to_vector(out.sigma_tilde)};
}

Vector MetricNet::u(const MetricNetParams& phi, const Vector& theta) const {
  return to_vector(u_generic<double>(as_span(phi.values), as_span(theta)));
}

VectorField MetricNet::u_field(const MetricNetParams& phi) const {
  return [net = *this, phi](const Vector& theta) { return net.u(phi, theta); };
}

MetricNetGraph metric_net_forward(const MetricNet& net, const MetricNetParams& phi,
                                  const Vector& theta) {
  MetricNetGraph g;
  g.tape = std::make_unique<ad::Tape>();
  const std::vector<ad::Var> p = leaves(*g.tape, phi.values);
  const std::vector<ad::Var> th = constants(theta);
  NetOutput<ad::Var> out = net.forward_generic<ad::Var>(p, th);
  g.omega_tilde = std::move(out.omega_tilde);
  g.sigma_tilde = std::move(out.sigma_tilde);
  return g;
}

LossEvaluation divergence_loss(const MetricNet& net, const MetricNetParams& phi,
                               const Vector& theta, const VectorField& grad_fn,
                               const std::vector<Vector>& probes, double fd_step) {
  using ad::Var;
  if (probes.empty()) throw BadDimensions("divergence_loss: at least one probe is required");
  const double h = fd_step;
  const std::size_t n = static_cast<std::size_t>(theta.size());

  ad::Tape tape;
  const std::vector<Var> p = leaves(tape, phi.values);
  auto u_at = [&](const std::vector<Var>& th) { return net.u_generic<Var>(p, th); };

  Var trace = 0.0;
  for (const Vector& v : probes) {
    const Vector tp = theta + h * v;
    const Vector tm = theta - h * v;
    const std::vector<Var> jp =
        inverse_apply_generic<Var>(u_at(constants(tp)), eval_checked(grad_fn, tp, "grad_fn"));
    const std::vector<Var> jm =
        inverse_apply_generic<Var>(u_at(constants(tm)), eval_checked(grad_fn, tm, "grad_fn"));
    Var term = 0.0;
    for (std::size_t i = 0; i < n; ++i) term += v(static_cast<Eigen::Index>(i)) * (jp[i] - jm[i]);
    trace += term / (2.0 * h);
  }
  trace = trace / static_cast<double>(probes.size());

  const std::vector<Var> u0 = u_at(constants(theta));
  const std::vector<Var> j0 = inverse_apply_generic<Var>(u0, eval_checked(grad_fn, theta, "grad_fn"));
  Var j_norm2 = 0.0;
  for (const Var& x : j0) j_norm2 += x * x;

  Var div = trace;
  if (j_norm2.val > 0.0) {
    const Var j_norm = sqrt(j_norm2);
    std::vector<Var> thp(n);
    std::vector<Var> thm(n);
    for (std::size_t i = 0; i < n; ++i) {
      const Var step = h * (j0[i] / j_norm);
      thp[i] = theta(static_cast<Eigen::Index>(i)) + step;
      thm[i] = theta(static_cast<Eigen::Index>(i)) - step;
    }
    const std::vector<Var> up = u_at(thp);
    const std::vector<Var> um = u_at(thm);
    Var dot = 0.0;
    Var u_norm2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      dot += u0[i] * (up[i] - um[i]);
      u_norm2 += u0[i] * u0[i];
    }
    div = trace + dot / (2.0 * h) * j_norm / (1.0 + u_norm2);
  }
  const Var loss = div * div;

  LossEvaluation out;
  out.div = div.val;
  out.loss = loss.val;
  out.gradient = tape.gradient(loss);
  if (out.gradient.size() != phi.values.size()) out.gradient = Vector::Zero(phi.values.size());
  return out;
}

MetricTrainResult train_metric_net(const MetricNet& net, const MetricNetParams& phi,
                                   const Vector& theta, const VectorField& grad_fn,
                                   const ProbeConfig& pc, int max_iters, const AdamConfig& adam) {
  if (max_iters < 1) throw BadDimensions("train_metric_net: max_iters must be >= 1");
  if (pc.probe_count < 1) throw BadDimensions("train_metric_net: probe_count must be >= 1");
  const int n = static_cast<int>(theta.size());
  const double h = pc.step_for(theta);
  const RngStream base(pc.seed);
  RngStream probe_rng = base.substream(1);
  RngStream kick_rng = base.substream(2);

  MetricTrainResult result;
  result.params = phi;
  result.best_loss = std::numeric_limits<double>::infinity();
  MetricNetParams cur = phi;
  Vector m = Vector::Zero(phi.size());
  Vector v = Vector::Zero(phi.size());
  int t = 0;

  for (int iter = 0; iter <= max_iters; ++iter) {
    std::vector<Vector> probes;
    probes.reserve(static_cast<std::size_t>(pc.probe_count));
    for (int k = 0; k < pc.probe_count; ++k) probes.push_back(rademacher_probe(probe_rng, n));

    const LossEvaluation eval = divergence_loss(net, cur, theta, grad_fn, probes, h);
    if (!std::isfinite(eval.loss) || !all_finite(eval.gradient)) {
      result.aborted = true;
      break;
    }
    result.history.push_back({iter, eval.div, eval.loss});
    if (eval.loss < result.best_loss) {
      result.best_loss = eval.loss;
      result.params = cur;
    }
    if (iter == max_iters) break;

    if (iter == 0 && eval.loss > 0.0 && net.config().head_kick > 0.0 && cur.heads_zero()) {
      for (const ParamBlock& b : cur.blocks) {
        if (b.tag == BlockTag::shared) continue;
        for (int i = 0; i < b.size; ++i) {
          cur.values(b.offset + i) = kick_rng.uniform(-net.config().head_kick, net.config().head_kick);
        }
      }
      result.kicked = true;
      continue;
    }

    ++t;
    const Vector& g = eval.gradient;
    m = adam.beta1 * m + (1.0 - adam.beta1) * g;
    v = adam.beta2 * v + (1.0 - adam.beta2) * g.cwiseProduct(g);
    const double c1 = 1.0 - std::pow(adam.beta1, t);
    const double c2 = 1.0 - std::pow(adam.beta2, t);
    for (Eigen::Index i = 0; i < cur.values.size(); ++i) {
      cur.values(i) -= adam.lr * (m(i) / c1) / (std::sqrt(v(i) / c2) + adam.eps);
    }
  }
  return result;
}

}  // namespace rpg
