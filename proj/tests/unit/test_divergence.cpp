#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "rpg/divergence.hpp"
#include "rpg/error.hpp"
#include "rpg/metric_field.hpp"
#include "test_util.hpp"

using namespace rpg;
using rpg::test::random_matrix;
using rpg::test::random_vector;

namespace {

ScalarField half_norm2() {
  return [](const Vector& t) { return 0.5 * t.squaredNorm(); };
}
VectorField identity_field() {
  return [](const Vector& t) { return t; };
}
VectorField zero_field(int n) {
  return [n](const Vector&) { return Vector(Vector::Zero(n)); };
}
VectorField constant_field(Vector c) {
  return [c](const Vector&) { return c; };
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// f = 1/2 t^T A t + sum_i c_i sin(t_i) and u = s * tanh(M t + d).
struct SmoothFixture {
  Matrix a;
  Vector c;
  Matrix m;
  Vector d;
  double s = 0.5;

  static SmoothFixture draw(RngStream& rng, int n) {
    SmoothFixture fx;
    const Matrix b = random_matrix(rng, n, n);
    fx.a = 0.25 * (b + b.transpose()) + 2.0 * Matrix::Identity(n, n);
    fx.c = random_vector(rng, n, -0.5, 0.5);
    fx.m = random_matrix(rng, n, n) / std::sqrt(static_cast<double>(n));
    fx.d = random_vector(rng, n);
    return fx;
  }

  ScalarField f() const {
    return [*this](const Vector& t) { return 0.5 * t.dot(a * t) + c.dot(t.array().sin().matrix()); };
  }
  VectorField grad() const {
    return [*this](const Vector& t) { return Vector(a * t + c.cwiseProduct(t.array().cos().matrix())); };
  }
  VectorField u() const {
    return [*this](const Vector& t) { return Vector(s * (m * t + d).array().tanh().matrix()); };
  }
};

}  // namespace

TEST(DivergenceExact, EuclideanQuadratic) {
  const FieldEvaluator fe{identity_field(), zero_field(2), 2};
  EXPECT_NEAR(divergence_exact(fe, Vector::Constant(2, 0.4), 1e-4), 2.0, 1e-9);
}

TEST(DivergenceExact, ConstantMetric) {
  Vector u(2);
  u << 1.0, 0.0;
  const FieldEvaluator fe{identity_field(), constant_field(u), 2};
  EXPECT_NEAR(divergence_exact(fe, Vector::Constant(2, -0.3), 1e-4), 1.5, 1e-9);
}

TEST(DivergenceExact, MatchesLaplaceBeltramiForUEqualsTheta) {
  Vector theta(3);
  theta << 0.3, -0.2, 0.5;
  const FieldEvaluator fe{identity_field(), identity_field(), 3};
  const double exact = divergence_exact(fe, theta, 1e-4);
  EXPECT_NEAR(exact, laplace_beltrami_oracle(half_norm2(), identity_field(), theta), 1e-4);
}

TEST(DivergenceExact, NonFiniteFieldThrows) {
  const VectorField bad = [](const Vector& t) {
    Vector v = t;
    v(0) = std::nan("");
    return v;
  };
  const FieldEvaluator fe{bad, zero_field(2), 2};
  EXPECT_THROW(divergence_exact(fe, Vector::Zero(2), 1e-4), NonFiniteField);
}

TEST(DivergenceEstimate, EuclideanQuadraticIsExactlyN) {
  const int n = 7;
  const FieldEvaluator fe{identity_field(), zero_field(n), n};
  for (int k : {1, 3, 17}) {
    const ProbeConfig pc{k, 1e-3, 5};
    EXPECT_NEAR(divergence_estimate(fe, Vector::Constant(n, 0.2), pc), n, 1e-9);
  }
}

TEST(DivergenceEstimate, ConstantFieldHasZeroTrace) {
  RngStream rng(41);
  const FieldEvaluator fe{constant_field(random_vector(rng, 6)), zero_field(6), 6};
  EXPECT_NEAR(divergence_estimate(fe, random_vector(rng, 6), ProbeConfig{32, 0.0, 1}), 0.0, 1e-8);
}

TEST(DivergenceEstimate, CloseToExactOnSmoothField) {
  const int n = 16;
  RngStream rng(42);
  std::vector<double> rel;
  for (int seed = 0; seed < 20; ++seed) {
    const SmoothFixture fx = SmoothFixture::draw(rng, n);
    const Vector theta = random_vector(rng, n);
    const FieldEvaluator fe{fx.grad(), fx.u(), n};
    const double exact = divergence_exact(fe, theta, default_fd_step(theta));
    const double est = divergence_estimate(fe, theta, ProbeConfig{64, 0.0, static_cast<std::uint64_t>(seed)});
    rel.push_back(std::abs(est - exact) / std::abs(exact));
  }
  EXPECT_LE(median(rel), 0.15);
}

TEST(DivergenceEstimate, ErrorShrinksWithProbeCount) {
  const int n = 12;
  RngStream rng(43);
  const SmoothFixture fx = SmoothFixture::draw(rng, n);
  const Vector theta = random_vector(rng, n);
  const FieldEvaluator fe{fx.grad(), zero_field(n), n};
  const double exact = fx.a.trace() - fx.c.cwiseProduct(theta.array().sin().matrix()).sum();
  double previous = 1e300;
  for (int k : {4, 16, 64, 256}) {
    std::vector<double> err;
    for (int seed = 0; seed < 101; ++seed) {
      err.push_back(std::abs(divergence_estimate(fe, theta, ProbeConfig{k, 0.0, static_cast<std::uint64_t>(1000 + seed)}) - exact));
    }
    const double med = median(err);
    EXPECT_LT(med, previous) << "K=" << k;
    previous = med;
  }
}

TEST(DivergenceEstimate, SameProbesSameResult) {
  RngStream rng(44);
  const SmoothFixture fx = SmoothFixture::draw(rng, 5);
  const FieldEvaluator fe{fx.grad(), fx.u(), 5};
  const Vector theta = random_vector(rng, 5);
  const ProbeConfig pc{9, 0.0, 77};
  EXPECT_EQ(divergence_estimate(fe, theta, pc), divergence_estimate(fe, theta, pc));
  EXPECT_EQ(draw_probes(pc, 5).size(), 9u);
}

TEST(LaplaceBeltrami, EuclideanQuadratic) {
  EXPECT_NEAR(laplace_beltrami_oracle(half_norm2(), zero_field(2), Vector::Constant(2, 0.1)), 2.0, 1e-5);
}

TEST(LaplaceBeltrami, ConstantMetricMatchesExact) {
  RngStream rng(45);
  const Vector u = random_vector(rng, 3);
  const Vector theta = random_vector(rng, 3);
  const FieldEvaluator fe{identity_field(), constant_field(u), 3};
  EXPECT_NEAR(laplace_beltrami_oracle(half_norm2(), constant_field(u), theta),
              divergence_exact(fe, theta, 1e-4), 1e-4);
}

TEST(LaplaceBeltrami, SmoothFixturesMatchExactAndCovariantForm) {
  RngStream rng(46);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 2 + trial % 5;
    const SmoothFixture fx = SmoothFixture::draw(rng, n);
    const Vector theta = random_vector(rng, n);
    const double lb = laplace_beltrami_oracle(fx.f(), fx.u(), theta);
    const FieldEvaluator fe{fx.grad(), fx.u(), n};
    EXPECT_NEAR(divergence_exact(fe, theta, default_fd_step(theta)), lb, 1e-3) << "trial " << trial;
    EXPECT_NEAR(covariant_laplacian_oracle(fx.f(), fx.u(), theta), lb, 1e-3) << "trial " << trial;
  }
}

TEST(CovariantLaplacian, FlatMetricIsHessianTrace) {
  Matrix a(3, 3);
  a << 2.0, 0.5, 0.0, 0.5, 3.0, -1.0, 0.0, -1.0, 4.0;
  const ScalarField f = [a](const Vector& t) { return 0.5 * t.dot(a * t); };
  EXPECT_NEAR(covariant_laplacian_oracle(f, zero_field(3), Vector::Constant(3, 0.2)), 9.0, 1e-5);
}

TEST(CovariantLaplacian, LinearFunctionFlatMetric) {
  const ScalarField f = [](const Vector& t) { return 3.0 * t(0) - 2.0 * t(1); };
  EXPECT_NEAR(covariant_laplacian_oracle(f, zero_field(2), Vector::Constant(2, 0.7)), 0.0, 1e-6);
}

TEST(HessianTrace, DiagonalQuadraticExact) {
  Vector d(3);
  d << 1.0, 2.0, 3.0;
  const VectorField g = [d](const Vector& t) { return Vector(d.cwiseProduct(t)); };
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    EXPECT_NEAR(hessian_trace_hutchinson(g, Vector::Constant(3, 0.5), ProbeConfig{4, 0.0, seed}), 6.0, 1e-6);
  }
}

TEST(HessianTrace, LinearFunctionIsZero) {
  const VectorField g = constant_field(Vector::Constant(4, 2.5));
  EXPECT_NEAR(hessian_trace_hutchinson(g, Vector::Ones(4), ProbeConfig{8, 0.0, 3}), 0.0, 1e-8);
}

TEST(HessianTrace, RandomSymmetricQuadratic) {
  const int n = 16;
  RngStream rng(47);
  std::vector<double> rel;
  for (int seed = 0; seed < 20; ++seed) {
    const Matrix b = random_matrix(rng, n, n);
    const Matrix a = b * b.transpose() / n;
    const VectorField g = [a](const Vector& t) { return Vector(a * t); };
    const double est = hessian_trace_hutchinson(g, random_vector(rng, n), ProbeConfig{256, 0.0, static_cast<std::uint64_t>(seed)});
    rel.push_back(std::abs(est - a.trace()) / a.trace());
  }
  EXPECT_LE(median(rel), 0.10);
}

TEST(DivergenceRatio, Examples) {
  EXPECT_EQ(divergence_ratio(0.0, 5.0), 0.0);
  EXPECT_DOUBLE_EQ(divergence_ratio(2.0, -4.0), 0.5);
  EXPECT_DOUBLE_EQ(divergence_ratio(1.0, 0.0), 1e12);
}

TEST(DivergenceReport, EuclideanRatioIsOne) {
  RngStream rng(48);
  const SmoothFixture fx = SmoothFixture::draw(rng, 6);
  const FieldEvaluator fe{fx.grad(), zero_field(6), 6};
  const DivergenceReport r = divergence_report(fe, random_vector(rng, 6), ProbeConfig{16, 0.0, 2});
  EXPECT_DOUBLE_EQ(r.div, r.hessian_trace);
  EXPECT_DOUBLE_EQ(r.ratio, 1.0);
  EXPECT_EQ(r.probe_count, 16);
  EXPECT_EQ(r.method, DivergenceMethod::estimated);
}
