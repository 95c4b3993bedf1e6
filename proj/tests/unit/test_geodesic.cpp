#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "rpg/geodesic.hpp"
#include "rpg/metric_field.hpp"
#include "test_util.hpp"

using namespace rpg;
using rpg::test::random_matrix;
using rpg::test::random_vector;

namespace {

VectorField identity_field() {
  return [](const Vector& t) { return t; };
}
VectorField zero_field(int n) {
  return [n](const Vector&) { return Vector(Vector::Zero(n)); };
}
VectorField constant_field(Vector c) {
  return [c](const Vector&) { return c; };
}
VectorField tanh_field(const Matrix& m, const Vector& d) {
  return [m, d](const Vector& t) { return Vector(0.7 * (m * t + d).array().tanh().matrix()); };
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

}  // namespace

TEST(GeodesicGradient, FlatMetricIsExactlyJ) {
  RngStream rng(51);
  const Vector theta = random_vector(rng, 5), j = random_vector(rng, 5);
  EXPECT_EQ(geodesic_gradient(zero_field(5), theta, j, {0.3, 0.0}), j);
  EXPECT_EQ(geodesic_gradient_component(zero_field(5), theta, j, {0.3, 0.0}), j);
}

TEST(GeodesicGradient, KappaZeroIsJ) {
  RngStream rng(52);
  const Vector theta = random_vector(rng, 4), j = random_vector(rng, 4);
  EXPECT_EQ(geodesic_gradient(identity_field(), theta, j, {0.0, 0.0}), j);
}

TEST(GeodesicGradient, ConstantMetricCorrectionVanishes) {
  RngStream rng(53);
  const Vector theta = random_vector(rng, 4), j = random_vector(rng, 4);
  const VectorField u = constant_field(random_vector(rng, 4));
  EXPECT_LE((geodesic_gradient_component(u, theta, j, {1.0, 0.0}) - j).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LE((geodesic_gradient(u, theta, j, {1.0, 0.0}) - j).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(GeodesicGradient, MatrixAndComponentFormsAgreeForUEqualsTheta) {
  RngStream rng(54);
  const Vector theta = random_vector(rng, 3), j = random_vector(rng, 3);
  const GeodesicConfig cfg{0.2, 0.0};
  const Vector a = geodesic_gradient(identity_field(), theta, j, cfg);
  const Vector b = geodesic_gradient_component(identity_field(), theta, j, cfg);
  EXPECT_LE((a - b).norm(), 1e-4 * b.norm());
}

TEST(GeodesicGradient, TwoDimensionalExample) {
  Vector theta(2), j(2);
  theta << 1.0, 0.0;
  j << 1.0, 0.0;
  const GeodesicConfig cfg{1.0, 0.0};
  const Vector a = geodesic_gradient(identity_field(), theta, j, cfg);
  const Vector b = geodesic_gradient_component(identity_field(), theta, j, cfg);
  EXPECT_LE((a - b).norm(), 1e-4 * b.norm());
  // q(theta) = |J|^2 + (theta . J)^2, grad q = 2 (theta . J) J = (2, 0); G^{-1} (2, 0) = (1, 0).
  EXPECT_NEAR(a(0), 2.0, 1e-8);
  EXPECT_NEAR(a(1), 0.0, 1e-8);
}

TEST(GeodesicGradient, FormsAgreeOnRandomFixtures) {
  RngStream rng(55);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 2 + trial % 7;
    const VectorField u = tanh_field(random_matrix(rng, n, n), random_vector(rng, n));
    const Vector theta = random_vector(rng, n), j = random_vector(rng, n);
    const GeodesicConfig cfg{rng.uniform(0.01, 1.0), 0.0};
    const Vector a = geodesic_gradient(u, theta, j, cfg);
    const Vector b = geodesic_gradient_component(u, theta, j, cfg);
    EXPECT_LE((a - b).norm(), 1e-4 * b.norm()) << "n=" << n;
  }
}

TEST(Christoffel, FlatAndConstantMetricsVanish) {
  RngStream rng(56);
  const Vector theta = random_vector(rng, 3);
  const ChristoffelTensor flat = christoffel_fd(zero_field(3), theta, 1e-4);
  for (double v : flat.data) EXPECT_EQ(v, 0.0);
  const ChristoffelTensor c = christoffel_fd(constant_field(random_vector(rng, 3)), theta, 1e-4);
  for (double v : c.data) EXPECT_LE(std::abs(v), 1e-8);
}

TEST(Christoffel, LowerIndexSymmetry) {
  Vector theta(2);
  theta << 1.0, 0.0;
  EXPECT_LE(christoffel_fd(identity_field(), theta, 1e-4).symmetry_residual(), 1e-6);
  RngStream rng(57);
  const VectorField u = tanh_field(random_matrix(rng, 4, 4), random_vector(rng, 4));
  EXPECT_LE(christoffel_fd(u, random_vector(rng, 4), 1e-4).symmetry_residual(), 1e-6);
}

TEST(Christoffel, RankOneClosedForm) {
  // u = theta: d_l g_{mn} = delta_{lm} t_n + t_m delta_{ln}, so
  // Gamma^d_{mn} = (G^{-1} t)_d delta_{mn}.
  Vector theta(3);
  theta << 0.4, -0.1, 0.9;
  const ChristoffelTensor g = christoffel_fd(identity_field(), theta, 1e-4);
  const Vector w = inverse_apply(MetricPoint(theta), theta);
  for (int d = 0; d < 3; ++d)
    for (int m = 0; m < 3; ++m)
      for (int n = 0; n < 3; ++n) EXPECT_NEAR(g(d, m, n), m == n ? w(d) : 0.0, 1e-8);
}

TEST(Christoffel, MetricCompatibility) {
  RngStream rng(58);
  for (int n = 2; n <= 4; ++n) {
    const VectorField u = tanh_field(random_matrix(rng, n, n), random_vector(rng, n));
    EXPECT_LE(metric_compatibility_residual(u, random_vector(rng, n), 1e-4), 1e-4);
  }
}

TEST(GeodesicOde, StraightLineWhenFlat) {
  RngStream rng(59);
  const Vector theta = random_vector(rng, 3), j = random_vector(rng, 3);
  EXPECT_LE((geodesic_ode_direction(zero_field(3), theta, j, 0.01) - j).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(geodesic_ode_direction(identity_field(), theta, j, 0.0), j);
}

TEST(GeodesicOde, MatchesComponentFormAtSmallStep) {
  RngStream rng(60);
  const double dt = 1e-3;
  for (int trial = 0; trial < 5; ++trial) {
    const Vector theta = random_vector(rng, 3), j = random_vector(rng, 3);
    const Vector ode = geodesic_ode_direction(identity_field(), theta, j, dt);
    const Vector t = geodesic_gradient_component(identity_field(), theta, j, {dt / 2.0, 0.0});
    EXPECT_LE(angle_between(ode, t), 1e-2);
  }
}

TEST(GeodesicOde, AngleShrinksWithStep) {
  RngStream rng(61);
  std::vector<std::vector<double>> angles(3);
  const double steps[3] = {1e-2, 1e-3, 1e-4};
  for (int trial = 0; trial < 9; ++trial) {
    const VectorField u = tanh_field(random_matrix(rng, 3, 3), random_vector(rng, 3));
    const Vector theta = random_vector(rng, 3), j = random_vector(rng, 3);
    for (int s = 0; s < 3; ++s) {
      const double dt = steps[s];
      const Vector ode = geodesic_ode_direction(u, theta, j, dt);
      const Vector t = geodesic_gradient_component(u, theta, j, {dt / 2.0, 1e-5});
      angles[static_cast<std::size_t>(s)].push_back(angle_between(ode, t));
    }
  }
  EXPECT_GT(median(angles[0]), median(angles[1]));
  EXPECT_GT(median(angles[1]), median(angles[2]));
}

TEST(ChristoffelTensor, ContractAndAngle) {
  ChristoffelTensor g(2);
  g(0, 0, 1) = 1.0;
  g(0, 1, 0) = 1.0;
  Vector a(2), b(2);
  a << 1.0, 2.0;
  b << 3.0, 4.0;
  const Vector c = g.contract(a, b);
  EXPECT_DOUBLE_EQ(c(0), 1.0 * 4.0 + 2.0 * 3.0);
  EXPECT_DOUBLE_EQ(c(1), 0.0);
  EXPECT_NEAR(angle_between(a, 2.0 * a), 0.0, 1e-7);
  Vector e0 = Vector::Zero(2), e1 = Vector::Zero(2);
  e0(0) = 1.0;
  e1(1) = 1.0;
  EXPECT_NEAR(angle_between(e0, e1), std::acos(0.0), 1e-15);
}
