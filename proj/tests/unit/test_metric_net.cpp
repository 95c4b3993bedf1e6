#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include <gtest/gtest.h>

#include "rpg/checkpoint.hpp"
#include "rpg/divergence.hpp"
#include "rpg/error.hpp"
#include "rpg/layout.hpp"
#include "rpg/metric_net.hpp"
#include "test_util.hpp"

using namespace rpg;
using rpg::test::random_vector;

namespace {

LayerLayout small_policy_layout() {
  LayerLayout l;
  l.add_matrix("w1", 6, 3).add_vector("b1", 6).add_matrix("w2", 2, 6).add_vector("b2", 2, true);
  return l;
}

MetricNetConfig small_config() {
  MetricNetConfig c;
  c.m_tilde = 3;
  c.segment_width = 4;
  c.trunk_width = 5;
  return c;
}

const ParamBlock& block_named(const MetricNetParams& phi, const std::string& name) {
  for (const ParamBlock& b : phi.blocks)
    if (b.name == name) return b;
  throw std::runtime_error("no block " + name);
}

void randomize_heads(MetricNetParams& phi, RngStream& rng, double scale) {
  for (const ParamBlock& b : phi.blocks) {
    if (b.tag == BlockTag::shared) continue;
    for (int i = 0; i < b.size; ++i) phi.values(b.offset + i) = rng.uniform(-scale, scale);
  }
}

VectorField bowl_gradient(int n) {
  return [n](const Vector& t) {
    Vector g(n);
    for (int i = 0; i < n; ++i) g(i) = (i + 1.0) * t(i);
    return g;
  };
}

std::filesystem::path temp_file(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "rpg_unit";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(LayerLayout, FlattenRoundTrip) {
  const LayerLayout l = small_policy_layout();
  EXPECT_EQ(l.dim(), 18 + 6 + 12 + 2);
  RngStream rng(71);
  const Vector theta = random_vector(rng, l.dim());
  const std::vector<Matrix> blocks = l.unflatten(theta);
  ASSERT_EQ(blocks.size(), 4u);
  EXPECT_EQ(blocks[0].rows(), 6);
  EXPECT_EQ(blocks[0].cols(), 3);
  EXPECT_EQ(blocks[0](1, 2), theta(1 * 3 + 2));  // row-major
  EXPECT_EQ(l.flatten(blocks), theta);
}

TEST(LayerLayout, MismatchesRejected) {
  const LayerLayout l = small_policy_layout();
  EXPECT_THROW(l.unflatten(Vector::Zero(5)), LayoutMismatch);
  EXPECT_THROW(LayerLayout().add_matrix("w", 0, 3), BadDimensions);
  EXPECT_TRUE(l == small_policy_layout());
  EXPECT_FALSE(l == LayerLayout::single_vector(l.dim()));
}

TEST(MetricNet, BlocksAreTaggedAndContiguous) {
  const MetricNet net(small_policy_layout(), small_config());
  int offset = 0;
  int omega = 0, sigma = 0;
  for (const ParamBlock& b : net.blocks()) {
    EXPECT_EQ(b.offset, offset);
    offset += b.size;
    if (b.tag == BlockTag::omega_head) omega += b.size;
    if (b.tag == BlockTag::sigma_head) sigma += b.size;
  }
  EXPECT_EQ(offset, net.param_count());
  EXPECT_EQ(omega, 3 * 5 + 3);
  EXPECT_EQ(sigma, 3 * 5 + 3);
}

TEST(MetricNet, ZeroHeadsGiveZeroOutputs) {
  const MetricNet net(small_policy_layout(), small_config());
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    RngStream rng(seed);
    const MetricNetParams phi = net.init_params(rng);
    EXPECT_TRUE(phi.heads_zero());
    const TransformParams tp = net.forward(phi, random_vector(rng, net.layout().dim(), -3.0, 3.0));
    EXPECT_EQ(tp.omega_tilde, Vector::Zero(3));
    EXPECT_EQ(tp.sigma_tilde, Vector::Zero(3));
    EXPECT_EQ(net.u(phi, random_vector(rng, net.layout().dim())), Vector::Zero(net.layout().dim()));
  }
}

TEST(MetricNet, SeedsChangeSharedParameters) {
  const MetricNet net(small_policy_layout(), small_config());
  RngStream a(1), b(2);
  EXPECT_NE(net.init_params(a).values, net.init_params(b).values);
  RngStream c(1);
  RngStream a2(1);
  EXPECT_EQ(net.init_params(c).values, net.init_params(a2).values);
}

TEST(MetricNet, ForwardIsDeterministic) {
  const MetricNet net(small_policy_layout(), small_config());
  RngStream rng(72);
  MetricNetParams phi = net.init_params(rng);
  randomize_heads(phi, rng, 0.5);
  const Vector theta = random_vector(rng, net.layout().dim());
  const TransformParams a = net.forward(phi, theta), b = net.forward(phi, theta);
  EXPECT_EQ(a.omega_tilde, b.omega_tilde);
  EXPECT_EQ(a.sigma_tilde, b.sigma_tilde);
}

TEST(MetricNet, TrunkPerturbationMatchesBackprop) {
  const MetricNet net(small_policy_layout(), small_config());
  RngStream rng(73);
  MetricNetParams phi = net.init_params(rng);
  randomize_heads(phi, rng, 0.5);
  const Vector theta = random_vector(rng, net.layout().dim());

  const MetricNetGraph g = metric_net_forward(net, phi, theta);
  const int k = block_named(phi, "trunk").offset + 3;
  const double h = 1e-5;
  MetricNetParams plus = phi, minus = phi;
  plus.values(k) += h;
  minus.values(k) -= h;
  const TransformParams tp = net.forward(plus, theta), tm = net.forward(minus, theta);
  for (int i = 0; i < 3; ++i) {
    const double fd_w = (tp.omega_tilde(i) - tm.omega_tilde(i)) / (2.0 * h);
    const double fd_s = (tp.sigma_tilde(i) - tm.sigma_tilde(i)) / (2.0 * h);
    const double ad_w = ad::backprop(*g.tape, g.omega_tilde[static_cast<std::size_t>(i)])(k);
    const double ad_s = ad::backprop(*g.tape, g.sigma_tilde[static_cast<std::size_t>(i)])(k);
    EXPECT_LE(std::abs(fd_w - ad_w), 1e-3 * std::max(1e-6, std::abs(ad_w)));
    EXPECT_LE(std::abs(fd_s - ad_s), 1e-3 * std::max(1e-6, std::abs(ad_s)));
  }
}

TEST(MetricNet, GraphValuesMatchPlainForward) {
  const MetricNet net(small_policy_layout(), small_config());
  RngStream rng(74);
  MetricNetParams phi = net.init_params(rng);
  randomize_heads(phi, rng, 0.5);
  const Vector theta = random_vector(rng, net.layout().dim());
  const MetricNetGraph g = metric_net_forward(net, phi, theta);
  const TransformParams tp = net.forward(phi, theta);
  EXPECT_EQ(g.tape->parameter_count(), static_cast<std::size_t>(phi.size()));
  for (int i = 0; i < 3; ++i) EXPECT_EQ(g.omega_tilde[static_cast<std::size_t>(i)].val, tp.omega_tilde(i));
}

TEST(MetricNet, LayoutMismatchRejected) {
  const MetricNet net(small_policy_layout(), small_config());
  RngStream rng(75);
  const MetricNetParams phi = net.init_params(rng);
  EXPECT_THROW(net.forward(phi, Vector::Zero(7)), LayoutMismatch);
  MetricNetParams short_phi = phi;
  short_phi.values.conservativeResize(phi.size() - 1);
  EXPECT_THROW(net.forward(short_phi, Vector::Zero(net.layout().dim())), LayoutMismatch);
}

TEST(MetricNet, BadConfigRejected) {
  MetricNetConfig c = small_config();
  c.m_tilde = 38;
  EXPECT_THROW(MetricNet(small_policy_layout(), c), BadDimensions);
}

TEST(MetricNet, InitialDivergenceEqualsHessianTrace) {
  const int n = 8;
  MetricNetConfig c;
  c.m_tilde = 2;
  const MetricNet net(LayerLayout::single_vector(n), c);
  RngStream rng(76);
  const MetricNetParams phi = net.init_params(rng);
  const FieldEvaluator fe{bowl_gradient(n), net.u_field(phi), n};
  const DivergenceReport r = divergence_report(fe, random_vector(rng, n), ProbeConfig{16, 0.0, 9});
  EXPECT_DOUBLE_EQ(r.div, r.hessian_trace);
  EXPECT_DOUBLE_EQ(r.ratio, 1.0);
}

TEST(MetricNet, ForwardCostLinearInDimension) {
  MetricNetConfig c;
  c.m_tilde = 4;
  auto time_forward = [&](int n) {
    const MetricNet net(LayerLayout::single_vector(n), c);
    RngStream rng(77);
    MetricNetParams phi = net.init_params(rng);
    randomize_heads(phi, rng, 0.1);
    const Vector theta = random_vector(rng, n);
    double best = 1e300;
    for (int rep = 0; rep < 7; ++rep) {
      const auto t0 = std::chrono::steady_clock::now();
      for (int k = 0; k < 20; ++k) (void)net.u(phi, theta);
      const auto t1 = std::chrono::steady_clock::now();
      best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
    }
    return best;
  };
  // Log-log slope over an 8x range; quadratic cost would give 2.
  const double small = time_forward(2000);
  const double large = time_forward(16000);
  const double slope = std::log(large / small) / std::log(8.0);
  EXPECT_LE(slope, 1.25) << "n: " << small << " s, 8n: " << large << " s";
}

TEST(DivergenceLoss, GradientMatchesFiniteDifferences) {
  const int n = 8;
  MetricNetConfig c;
  c.m_tilde = 2;
  const MetricNet net(LayerLayout::single_vector(n), c);
  RngStream rng(78);
  MetricNetParams phi = net.init_params(rng);
  randomize_heads(phi, rng, 0.3);
  const Vector theta = random_vector(rng, n);
  const std::vector<Vector> probes = draw_probes(ProbeConfig{8, 0.0, 4}, n);
  const double h = default_fd_step(theta);
  const LossEvaluation e = divergence_loss(net, phi, theta, bowl_gradient(n), probes, h);
  EXPECT_DOUBLE_EQ(e.loss, e.div * e.div);

  for (int trial = 0; trial < 5; ++trial) {
    const int k = static_cast<int>(rng.index(static_cast<std::size_t>(phi.size())));
    const double step = 1e-6 * std::max(1.0, std::abs(phi.values(k)));
    MetricNetParams p = phi, m = phi;
    p.values(k) += step;
    m.values(k) -= step;
    const double fd = (divergence_loss(net, p, theta, bowl_gradient(n), probes, h).loss -
                       divergence_loss(net, m, theta, bowl_gradient(n), probes, h).loss) /
                      (2.0 * step);
    EXPECT_LE(std::abs(fd - e.gradient(k)), 1e-3 * std::max(std::abs(fd), 1e-3 * e.gradient.cwiseAbs().maxCoeff()))
        << "coordinate " << k;
  }
}

TEST(TrainMetricNet, ZeroFieldKeepsLossZero) {
  const int n = 6;
  const MetricNet net(LayerLayout::single_vector(n), MetricNetConfig{});
  RngStream rng(79);
  const MetricNetParams phi = net.init_params(rng);
  const VectorField zero = [n](const Vector&) { return Vector(Vector::Zero(n)); };
  const MetricTrainResult r = train_metric_net(net, phi, random_vector(rng, n), zero, ProbeConfig{4, 0.0, 1}, 5, AdamConfig{});
  ASSERT_EQ(r.history.size(), 6u);
  for (const MetricTrainRecord& h : r.history) EXPECT_EQ(h.loss, 0.0);
  EXPECT_EQ(r.params.values, phi.values);
  EXPECT_FALSE(r.kicked);
}

TEST(TrainMetricNet, BestSoFarReturned) {
  const int n = 8;
  MetricNetConfig c;
  c.m_tilde = default_m_tilde(n);
  const MetricNet net(LayerLayout::single_vector(n), c);
  RngStream rng(80);
  const MetricNetParams phi = net.init_params(rng);
  const Vector theta = random_vector(rng, n);
  const MetricTrainResult r = train_metric_net(net, phi, theta, bowl_gradient(n), ProbeConfig{16, 0.0, 3}, 20, AdamConfig{});
  ASSERT_EQ(r.history.size(), 21u);
  double best = r.history.front().loss;
  for (const MetricTrainRecord& h : r.history) best = std::min(best, h.loss);
  EXPECT_EQ(r.best_loss, best);
  EXPECT_LE(r.best_loss, r.history.front().loss);
  EXPECT_TRUE(r.kicked);
}

TEST(TrainMetricNet, ReducesDivergenceOnDiagonalQuadratic) {
  const int n = 8;
  MetricNetConfig c;
  c.m_tilde = default_m_tilde(n);
  const MetricNet net(LayerLayout::single_vector(n), c);
  std::vector<double> ratios;
  for (std::uint64_t s = 0; s < 10; ++s) {
    RngStream rng(5000 + s);
    const MetricNetParams phi = net.init_params(rng);
    const Vector theta = random_vector(rng, n);
    const MetricTrainResult r = train_metric_net(net, phi, theta, bowl_gradient(n), ProbeConfig{64, 0.0, 9000 + s}, 20, AdamConfig{});
    ratios.push_back(r.best_loss / r.history.front().loss);
  }
  std::sort(ratios.begin(), ratios.end());
  EXPECT_LE(0.5 * (ratios[4] + ratios[5]), 0.5);
}

TEST(Checkpoint, RoundTripAndJson) {
  const MetricNet net(small_policy_layout(), small_config());
  RngStream rng(81);
  MetricNetParams phi = net.init_params(rng);
  randomize_heads(phi, rng, 0.5);
  const auto path = temp_file("roundtrip.ckpt");
  save_checkpoint(path.string(), net, phi);
  const MetricNetParams back = load_checkpoint(path.string(), net);
  EXPECT_EQ(back.values, phi.values);
  const std::string json = checkpoint_json(net, phi);
  EXPECT_NE(json.find("trunk"), std::string::npos);
  EXPECT_NE(json.find("omega_head"), std::string::npos);
}

TEST(Checkpoint, WrongNetworkRejected) {
  const MetricNet net(small_policy_layout(), small_config());
  RngStream rng(82);
  const auto path = temp_file("mismatch.ckpt");
  save_checkpoint(path.string(), net, net.init_params(rng));
  MetricNetConfig other = small_config();
  other.trunk_width = 7;
  EXPECT_THROW(load_checkpoint(path.string(), MetricNet(small_policy_layout(), other)), LayoutMismatch);
}

TEST(Checkpoint, GarbageRejected) {
  const auto path = temp_file("garbage.ckpt");
  std::ofstream(path) << "definitely not a checkpoint";
  const MetricNet net(small_policy_layout(), small_config());
  EXPECT_THROW(load_checkpoint(path.string(), net), CheckpointError);
  EXPECT_THROW(load_checkpoint(temp_file("missing.ckpt").string(), net), CheckpointError);
}
