#include <gtest/gtest.h>

#include "rpg/linalg.hpp"
#include "rpg/metric_field.hpp"
#include "test_util.hpp"

using namespace rpg;
using rpg::test::random_vector;

namespace {

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST(MetricPoint, DeterminantCached) {
  const MetricPoint mp(vec2(1.0, 2.0));
  EXPECT_DOUBLE_EQ(mp.g_det, 6.0);
  EXPECT_EQ(MetricPoint(Vector::Zero(3)).g_det, 1.0);
}

TEST(MetricMatrix, Examples) {
  EXPECT_EQ(metric_matrix(MetricPoint(Vector::Zero(3))), Matrix::Identity(3, 3));
  Matrix want(2, 2);
  want << 2.0, 2.0, 2.0, 5.0;
  EXPECT_EQ(metric_matrix(MetricPoint(vec2(1.0, 2.0))), want);
}

TEST(MetricMatrix, DominatesEuclidean) {
  RngStream rng(31);
  const MetricPoint mp(random_vector(rng, 8, -2.0, 2.0));
  const Matrix g = metric_matrix(mp);
  EXPECT_EQ(g, g.transpose());
  for (int k = 0; k < 100; ++k) {
    const Vector x = random_vector(rng, 8);
    EXPECT_GE(x.dot(g * x), x.squaredNorm() - 1e-14);
  }
}

TEST(MetricDet, Examples) {
  EXPECT_EQ(metric_det(MetricPoint(Vector::Zero(5))), 1.0);
  EXPECT_DOUBLE_EQ(metric_det(MetricPoint(vec2(1.0, 2.0))), 6.0);
}

TEST(MetricDet, MatchesDenseDeterminant) {
  RngStream rng(32);
  for (int n = 1; n <= 16; ++n) {
    const MetricPoint mp(random_vector(rng, n, -1.5, 1.5));
    const double dense = dense_det(metric_matrix(mp));
    EXPECT_LE(rpg::test::rel_err(metric_det(mp), dense), 1e-10) << "n=" << n;
  }
}

TEST(InverseApply, Examples) {
  const Vector x = vec2(0.3, -2.0);
  EXPECT_EQ(inverse_apply(MetricPoint(Vector::Zero(2)), x), x);
  const Vector y = inverse_apply(MetricPoint(vec2(1.0, 0.0)), vec2(1.0, 0.0));
  EXPECT_DOUBLE_EQ(y(0), 0.5);
  EXPECT_DOUBLE_EQ(y(1), 0.0);
}

TEST(InverseApply, MatchesDenseInverse) {
  RngStream rng(33);
  for (int trial = 0; trial < 20; ++trial) {
    const MetricPoint mp(random_vector(rng, 16, -2.0, 2.0));
    const Vector x = random_vector(rng, 16);
    const Vector dense = dense_inverse(metric_matrix(mp)) * x;
    EXPECT_LE((inverse_apply(mp, x) - dense).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(InverseApply, RoundTrip) {
  RngStream rng(34);
  const MetricPoint mp(random_vector(rng, 12, -3.0, 3.0));
  const Vector x = random_vector(rng, 12);
  EXPECT_LE((inverse_apply(mp, metric_matrix(mp) * x) - x).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(RegularizedGradient, Examples) {
  const Vector g = vec2(1.0, 0.0);
  EXPECT_EQ(regularized_gradient(MetricPoint(Vector::Zero(2)), g), g);
  const Vector j = regularized_gradient(MetricPoint(vec2(1.0, 0.0)), g);
  EXPECT_DOUBLE_EQ(j(0), 0.5);
  EXPECT_DOUBLE_EQ(j(1), 0.0);
  const Vector ortho = vec2(0.0, 3.0);
  EXPECT_EQ(regularized_gradient(MetricPoint(vec2(1.0, 0.0)), ortho), ortho);
}

TEST(RegularizedGradient, SolvesMetricSystem) {
  RngStream rng(35);
  const MetricPoint mp(random_vector(rng, 10, -2.0, 2.0));
  const Vector grad = random_vector(rng, 10);
  const Vector j = regularized_gradient(mp, grad);
  EXPECT_LE((metric_matrix(mp) * j - grad).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(j, inverse_apply(mp, grad));
  EXPECT_GT(j.dot(grad), 0.0);
}

TEST(BilinearForm, Examples) {
  RngStream rng(36);
  const Vector x = random_vector(rng, 5), y = random_vector(rng, 5);
  EXPECT_DOUBLE_EQ(bilinear_form(MetricPoint(Vector::Zero(5)), x, y), x.dot(y));
  EXPECT_DOUBLE_EQ(bilinear_form(MetricPoint(vec2(1.0, 0.0)), vec2(1.0, 0.0), vec2(1.0, 0.0)), 2.0);
}

TEST(BilinearForm, MatchesDenseAndDominates) {
  RngStream rng(37);
  const MetricPoint mp(random_vector(rng, 16, -2.0, 2.0));
  const Vector x = random_vector(rng, 16), y = random_vector(rng, 16);
  const double dense = x.dot(metric_matrix(mp) * y);
  EXPECT_NEAR(bilinear_form(mp, x, y), dense, 1e-12 * std::max(1.0, std::abs(dense)));
  EXPECT_GE(bilinear_form(mp, x, x), x.squaredNorm());
}

TEST(GradientBundle, FilledFromMetric) {
  const MetricPoint mp(vec2(1.0, 0.0));
  const GradientBundle b = make_bundle(mp, vec2(1.0, 1.0));
  EXPECT_EQ(b.grad, vec2(1.0, 1.0));
  EXPECT_EQ(b.reg_grad, regularized_gradient(mp, b.grad));
  EXPECT_FALSE(b.geo_grad.has_value());
}

TEST(InverseApplyGeneric, MatchesEigenPath) {
  RngStream rng(38);
  const Vector u = random_vector(rng, 7), x = random_vector(rng, 7);
  const std::vector<double> uv(u.data(), u.data() + 7);
  const std::vector<double> got = inverse_apply_generic<double>(uv, x);
  const Vector ref = inverse_apply(MetricPoint(u), x);
  for (int i = 0; i < 7; ++i) EXPECT_NEAR(got[static_cast<std::size_t>(i)], ref(i), 1e-15);
}
