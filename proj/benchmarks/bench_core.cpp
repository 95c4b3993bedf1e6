#include <benchmark/benchmark.h>

#include "rpg/divergence.hpp"
#include "rpg/fourier.hpp"
#include "rpg/layout.hpp"
#include "rpg/metric_field.hpp"
#include "rpg/metric_net.hpp"
#include "rpg/rng.hpp"

using namespace rpg;

namespace {

Vector random_vector(RngStream& rng, int n) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.normal();
  return v;
}

MetricNet make_net(int n) { return MetricNet(LayerLayout::single_vector(n), MetricNetConfig{}); }

MetricNetParams kicked_params(const MetricNet& net, RngStream& rng) {
  MetricNetParams phi = net.init_params(rng);
  for (const ParamBlock& b : phi.blocks) {
    if (b.tag == BlockTag::omega_head || b.tag == BlockTag::sigma_head) {
      for (int i = 0; i < b.size; ++i) phi.values(b.offset + i) = 0.1 * rng.uniform(-1.0, 1.0);
    }
  }
  return phi;
}

VectorField diag_quadratic_grad(int n) {
  return [n](const Vector& x) {
    Vector g(n);
    for (int i = 0; i < n; ++i) g(i) = (1.0 + i % 8) * x(i);
    return g;
  };
}

}  // namespace

static void BM_Rotate(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const FourierPair fp = build_fourier_pair(n, default_m_tilde(n));
  RngStream rng(1, 0);
  const Vector sigma = random_vector(rng, fp.m_tilde);
  const Vector x = random_vector(rng, n);
  for (auto _ : state) benchmark::DoNotOptimize(rotate(fp, sigma, x));
  state.SetComplexityN(n);
}
BENCHMARK(BM_Rotate)->RangeMultiplier(4)->Range(64, 16384)->Complexity(benchmark::oN);

static void BM_InverseApply(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  RngStream rng(2, 0);
  const MetricPoint mp(random_vector(rng, n));
  const Vector x = random_vector(rng, n);
  for (auto _ : state) benchmark::DoNotOptimize(inverse_apply(mp, x));
  state.SetComplexityN(n);
}
BENCHMARK(BM_InverseApply)->RangeMultiplier(4)->Range(64, 16384)->Complexity(benchmark::oN);

static void BM_MetricNetForward(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const MetricNet net = make_net(n);
  RngStream rng(3, 0);
  const MetricNetParams phi = kicked_params(net, rng);
  const Vector theta = random_vector(rng, n);
  for (auto _ : state) benchmark::DoNotOptimize(net.u(phi, theta));
  state.SetComplexityN(n);
}
BENCHMARK(BM_MetricNetForward)->RangeMultiplier(4)->Range(64, 16384)->Complexity(benchmark::oN);

static void BM_DivergenceEstimate(benchmark::State& state) {
  const int n = 32;
  const int k = static_cast<int>(state.range(0));
  const MetricNet net = make_net(n);
  RngStream rng(4, 0);
  const MetricNetParams phi = kicked_params(net, rng);
  const FieldEvaluator fe{diag_quadratic_grad(n), net.u_field(phi), n};
  const Vector theta = random_vector(rng, n);
  const ProbeConfig pc{k, 0.0, 7};
  for (auto _ : state) benchmark::DoNotOptimize(divergence_estimate(fe, theta, pc));
}
BENCHMARK(BM_DivergenceEstimate)->Arg(8)->Arg(16)->Arg(64);

static void BM_TrainMetricNetIteration(benchmark::State& state) {
  const int n = 8;
  const MetricNet net = make_net(n);
  RngStream rng(5, 0);
  const MetricNetParams phi = kicked_params(net, rng);
  const Vector theta = random_vector(rng, n);
  const ProbeConfig pc{16, 0.0, 11};
  for (auto _ : state) {
    benchmark::DoNotOptimize(train_metric_net(net, phi, theta, diag_quadratic_grad(n), pc, 1, AdamConfig{}));
  }
}
BENCHMARK(BM_TrainMetricNetIteration);
BENCHMARK_MAIN();
