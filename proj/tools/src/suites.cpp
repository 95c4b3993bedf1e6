#include "rpg/tools/suites.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <sstream>

#include <fmt/format.h>

#include "rpg/divergence.hpp"
#include "rpg/error.hpp"
#include "rpg/fourier.hpp"
#include "rpg/geodesic.hpp"
#include "rpg/linalg.hpp"
#include "rpg/metric_field.hpp"
#include "rpg/metric_net.hpp"
#include "rpg/rl/environment.hpp"
#include "rpg/rng.hpp"
#include "rpg/tools/metrics_log.hpp"

namespace rpg::tools {
namespace {

Check residual(std::string name, double measured, double bound, std::string note = {}) {
  return {std::move(name), measured, bound, measured <= bound, std::move(note)};
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size();
  return k % 2 == 1 ? v[k / 2] : 0.5 * (v[k / 2 - 1] + v[k / 2]);
}

Vector normal_vector(RngStream& rng, int n, double scale = 1.0) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = scale * rng.normal();
  return v;
}

Matrix normal_matrix(RngStream& rng, int rows, int cols, double scale = 1.0) {
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = scale * rng.normal();
  }
  return m;
}

Vector uniform_vector(RngStream& rng, int n, double lo, double hi) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.uniform(lo, hi);
  return v;
}

// f = 1/2 x^T A x + b^T x + c sum(sin x), u = s tanh(M x + d).
struct SmoothFixture {
  ScalarField f;
  VectorField grad;
  VectorField u;
  Vector theta;
};

SmoothFixture smooth_fixture(RngStream& rng, int n) {
  const Matrix b = normal_matrix(rng, n, n);
  const Matrix a = 0.5 * (b + b.transpose());
  const Vector lin = normal_vector(rng, n, 0.5);
  const double c = rng.uniform(0.1, 0.5);
  const Matrix m = normal_matrix(rng, n, n, 0.5);
  const Vector d = normal_vector(rng, n, 0.3);
  const double s = rng.uniform(0.3, 1.5);
  SmoothFixture fx;
  fx.f = [a, lin, c](const Vector& x) { return 0.5 * x.dot(a * x) + lin.dot(x) + c * x.array().sin().sum(); };
  fx.grad = [a, lin, c](const Vector& x) { return Vector(a * x + lin + c * x.array().cos().matrix()); };
  fx.u = [m, d, s](const Vector& x) { return Vector(s * (m * x + d).array().tanh().matrix()); };
  fx.theta = uniform_vector(rng, n, -1.0, 1.0);
  return fx;
}

// 1. G^-1 and det G against dense oracles.
SuiteResult suite_sherman_morrison() {
  SuiteResult r;
  RngStream rng(101);
  double inv_err = 0.0, det_err = 0.0;
  for (int k = 0; k < 200; ++k) {
    const int n = 1 + static_cast<int>(rng.index(16));
    const MetricPoint mp(normal_vector(rng, n, rng.uniform(0.1, 3.0)));
    const Vector x = normal_vector(rng, n);
    const Matrix g = metric_matrix(mp);
    inv_err = std::max(inv_err, (inverse_apply(mp, x) - dense_inverse(g) * x).cwiseAbs().maxCoeff());
    const double dd = dense_det(g);
    det_err = std::max(det_err, std::abs(metric_det(mp) - dd) / std::abs(dd));
  }
  r.checks.push_back(residual("inverse_apply vs dense inverse, max-norm (200 fixtures, n<=16)", inv_err, 1e-10));
  r.checks.push_back(residual("metric_det vs dense determinant, relative", det_err, 1e-10));
  return r;
}

// 2. Divergence formula against the coordinate and covariant Laplacians.
SuiteResult suite_prop1() {
  SuiteResult r;
  RngStream rng(202);
  double exact_vs_lb = 0.0, cov_vs_lb = 0.0;
  for (int k = 0; k < 20; ++k) {
    const int n = 2 + k % 5;
    const SmoothFixture fx = smooth_fixture(rng, n);
    const FieldEvaluator fe{fx.grad, fx.u, n};
    const double exact = divergence_exact(fe, fx.theta, default_fd_step(fx.theta));
    const double lb = laplace_beltrami_oracle(fx.f, fx.u, fx.theta);
    const double cov = covariant_laplacian_oracle(fx.f, fx.u, fx.theta);
    exact_vs_lb = std::max(exact_vs_lb, std::abs(exact - lb));
    cov_vs_lb = std::max(cov_vs_lb, std::abs(cov - lb));
  }
  r.checks.push_back(residual("divergence_exact vs Laplace-Beltrami oracle (20 fixtures, n<=6)", exact_vs_lb, 1e-3));
  r.checks.push_back(residual("covariant Laplacian vs Laplace-Beltrami oracle", cov_vs_lb, 1e-3));
  return r;
}

// 3. exp(A) = U Sc U^T - V Ss U^T.
SuiteResult suite_prop2() {
  SuiteResult r;
  RngStream rng(303);
  double worst = 0.0;
  int used = 0;
  while (used < 50) {
    const int n = 2 + static_cast<int>(rng.index(11));
    const Matrix b = normal_matrix(rng, n, n);
    try {
      worst = std::max(worst, check_exp_decomposition(b - b.transpose()));
      ++used;
    } catch (const DegenerateSpectrum&) {
      ++r.skipped;
    }
  }
  r.skip_reason = "degenerate spectrum";
  r.checks.push_back(residual("decomposition residual (50 non-degenerate fixtures, n<=12)", worst, 1e-7));
  Matrix a(2, 2);
  a << 0.0, 0.7, -0.7, 0.0;
  r.checks.push_back(residual("2x2 closed-form case residual", check_exp_decomposition(a), 1e-9));
  return r;
}

// 4. Rotation properties.
SuiteResult suite_prop3() {
  SuiteResult r;
  RngStream rng(404);
  const double pi = std::numbers::pi;

  double phase_err = 0.0;
  for (int n : {8, 32}) {
    const FourierPair fp = full_fourier_frame(n);
    for (int draw = 0; draw < 5; ++draw) {
      const Vector sigma = uniform_vector(rng, fp.m_tilde, -pi, pi);
      for (int i = 0; i < fp.m_tilde; ++i) {
        const Vector y = rotate(fp, sigma, fp.omega.col(i));
        for (int j = 0; j < n; ++j) {
          const double want = std::sqrt(2.0 / n) * std::cos(2.0 * pi * (i + 1) * j / n + sigma(i));
          phase_err = std::max(phase_err, std::abs(y(j) - want));
        }
      }
    }
  }
  r.checks.push_back(residual("full-frame phase shift per frequency (n in {8, 32})", phase_err, 1e-8));

  double keep_err = 0.0;
  for (int n : {16, 32, 64}) {
    for (int m = 1; m <= n / 4; m += std::max(1, n / 16)) {
      const FourierPair fp = build_fourier_pair(n, m);
      Vector x = normal_vector(rng, n);
      for (int pass = 0; pass < 2; ++pass) x -= fp.omega * (fp.omega.transpose() * x);
      const Vector y = rotate(fp, uniform_vector(rng, m, -pi, pi), x);
      keep_err = std::max(keep_err, (y - x).cwiseAbs().maxCoeff());
    }
  }
  r.checks.push_back(residual("truncated basis leaves high frequencies untouched", keep_err, 1e-12));

  // Worst fixture by measured / bound.
  double worst_ratio = -1.0, worst_meas = 0.0, worst_bound = 0.0;
  for (int k = 0; k < 100; ++k) {
    const int n = 8 + static_cast<int>(rng.index(57));
    const int m = 1 + static_cast<int>(rng.index(static_cast<std::size_t>(n / 4)));
    const FourierPair fp = build_fourier_pair(n, m);
    const Matrix rot = rotation_matrix(fp, uniform_vector(rng, m, -pi, pi));
    const double meas = max_abs(rot.transpose() * rot - Matrix::Identity(n, n));
    const double bound = 8.0 * fp.gram_error;
    const double ratio = meas / std::max(bound, 1e-300);
    if (ratio > worst_ratio) {
      worst_ratio = ratio;
      worst_meas = meas;
      worst_bound = bound;
    }
  }
  r.checks.push_back(residual("max|R^T R - I| <= 8 gram_error (100 fixtures, worst shown)", worst_meas, worst_bound));
  return r;
}

// 5. Geodesic direction: matrix vs component form, flat metric, ODE, Christoffel.
SuiteResult suite_prop4() {
  SuiteResult r;
  RngStream rng(505);
  double form_err = 0.0, sym = 0.0, compat = 0.0;
  for (int k = 0; k < 20; ++k) {
    const int n = 2 + k % 7;
    const SmoothFixture fx = smooth_fixture(rng, n);
    const Vector j = normal_vector(rng, n);
    const GeodesicConfig cfg{rng.uniform(0.05, 1.0), 0.0};
    const Vector matrix_form = geodesic_gradient(fx.u, fx.theta, j, cfg);
    const Vector component = geodesic_gradient_component(fx.u, fx.theta, j, cfg);
    form_err = std::max(form_err, (matrix_form - component).norm() / component.norm());
    const double h = default_fd_step(fx.theta);
    sym = std::max(sym, christoffel_fd(fx.u, fx.theta, h).symmetry_residual());
    compat = std::max(compat, metric_compatibility_residual(fx.u, fx.theta, h));
  }
  r.checks.push_back(residual("matrix form vs component form, relative (20 fixtures, n<=8)", form_err, 1e-4));

  double flat = 0.0;
  for (int k = 0; k < 5; ++k) {
    const int n = 2 + k;
    const Vector u0 = normal_vector(rng, n);
    const VectorField constant = [u0](const Vector&) { return u0; };
    const Vector theta = normal_vector(rng, n);
    const Vector j = normal_vector(rng, n);
    for (double kappa : {0.0, 0.3}) {
      flat = std::max(flat, (geodesic_gradient(constant, theta, j, {kappa, 0.0}) - j).cwiseAbs().maxCoeff());
      flat = std::max(flat, (geodesic_gradient_component(constant, theta, j, {kappa, 0.0}) - j).cwiseAbs().maxCoeff());
    }
  }
  r.checks.push_back(residual("flat metric gives T = J exactly", flat, 0.0));

  const VectorField identity = [](const Vector& x) { return x; };
  double angle = 0.0;
  const double dt = 1e-3;
  for (int k = 0; k < 5; ++k) {
    const Vector theta = uniform_vector(rng, 3, -1.0, 1.0);
    const Vector j = normal_vector(rng, 3);
    const Vector ode = geodesic_ode_direction(identity, theta, j, dt);
    const Vector t = geodesic_gradient_component(identity, theta, j, {dt / 2.0, 0.0});
    angle = std::max(angle, angle_between(ode, t));
  }
  r.checks.push_back(residual("angle to geodesic ODE direction at dt = 1e-3, kappa = dt/2 (rad)", angle, 1e-2));

  Vector e0(2);
  e0 << 1.0, 0.0;
  sym = std::max(sym, christoffel_fd(identity, e0, default_fd_step(e0)).symmetry_residual());
  compat = std::max(compat, metric_compatibility_residual(identity, e0, default_fd_step(e0)));
  r.checks.push_back(residual("Christoffel lower-index symmetry", sym, 1e-6));
  r.checks.push_back(residual("metric-compatibility residual", compat, 1e-4));
  return r;
}

// 6. Algorithm 1 on diag(1..8) and the phi-gradient.
SuiteResult suite_algorithm1() {
  SuiteResult r;
  const rl::LandscapeEnv bowl = rl::LandscapeEnv::bowl(8);
  const VectorField grad_fn = [&bowl](const Vector& x) { return Vector(-bowl.gradient(x)); };
  MetricNetConfig mc;
  mc.m_tilde = default_m_tilde(8);
  const MetricNet net(LayerLayout::single_vector(8), mc);

  std::vector<double> shrink;
  for (int s = 0; s < 10; ++s) {
    RngStream rng(5000 + s);
    const MetricNetParams phi = net.init_params(rng);
    const Vector theta = normal_vector(rng, 8);
    ProbeConfig pc;
    pc.seed = 9000 + s;
    const MetricTrainResult res = train_metric_net(net, phi, theta, grad_fn, pc, 20, AdamConfig{});
    shrink.push_back(res.best_loss / res.history.front().loss);
  }
  r.checks.push_back(residual("median final/initial Div^2 over 10 seeds (20 iterations)", median(shrink), 0.5));

  // Autodiff vs central differences on 5 phi coordinates, probes frozen.
  RngStream rng(6000);
  MetricNetParams phi = net.init_params(rng);
  for (const ParamBlock& b : phi.blocks) {
    if (b.tag == BlockTag::shared) continue;
    for (int i = 0; i < b.size; ++i) phi.values(b.offset + i) = rng.uniform(-0.3, 0.3);
  }
  const Vector theta = normal_vector(rng, 8);
  std::vector<Vector> probes;
  for (int k = 0; k < 8; ++k) probes.push_back(rademacher_probe(rng, 8));
  const double h = default_fd_step(theta);
  const LossEvaluation base = divergence_loss(net, phi, theta, grad_fn, probes, h);
  double worst = 0.0;
  for (int k = 0; k < 5; ++k) {
    const int idx = static_cast<int>(rng.index(static_cast<std::size_t>(phi.size())));
    const double step = 1e-5 * (1.0 + std::abs(phi.values(idx)));
    MetricNetParams hi = phi, lo = phi;
    hi.values(idx) += step;
    lo.values(idx) -= step;
    const double fd = (divergence_loss(net, hi, theta, grad_fn, probes, h).loss -
                       divergence_loss(net, lo, theta, grad_fn, probes, h).loss) /
                      (2.0 * step);
    const double ad = base.gradient(idx);
    worst = std::max(worst, std::abs(fd - ad) / std::max(std::abs(ad), 1e-12));
  }
  r.checks.push_back(residual("phi-gradient vs finite differences, relative (5 coordinates)", worst, 1e-3));
  return r;
}

// 7. Hutchinson trace estimates.
SuiteResult suite_hutchinson() {
  SuiteResult r;
  double diag_err = 0.0;
  {
    Vector d(3);
    d << 1.0, 2.0, 3.0;
    const VectorField g = [d](const Vector& x) { return Vector(d.cwiseProduct(x)); };
    for (int k : {1, 4, 64}) {
      ProbeConfig pc;
      pc.probe_count = k;
      pc.seed = 11 + k;
      diag_err = std::max(diag_err, std::abs(hessian_trace_hutchinson(g, Vector::Ones(3), pc) - 6.0));
    }
    RngStream rng(707);
    for (int k = 0; k < 5; ++k) {
      const Vector dd = uniform_vector(rng, 16, -3.0, 5.0);
      const VectorField g16 = [dd](const Vector& x) { return Vector(dd.cwiseProduct(x)); };
      ProbeConfig pc;
      pc.probe_count = 4;
      pc.seed = 100 + k;
      diag_err = std::max(diag_err, std::abs(hessian_trace_hutchinson(g16, normal_vector(rng, 16), pc) - dd.sum()) /
                                        std::max(1.0, std::abs(dd.sum())));
    }
  }
  r.checks.push_back(residual("diagonal quadratics (exact for Rademacher probes)", diag_err, 1e-6));

  std::vector<double> rel;
  for (int s = 0; s < 20; ++s) {
    RngStream rng(7100 + s);
    const Matrix b = normal_matrix(rng, 16, 16);
    const Matrix a = b * b.transpose() / 16.0;
    const VectorField g = [a](const Vector& x) { return Vector(a * x); };
    ProbeConfig pc;
    pc.probe_count = 256;
    pc.seed = 7200 + s;
    const double est = hessian_trace_hutchinson(g, normal_vector(rng, 16), pc);
    rel.push_back(std::abs(est - a.trace()) / std::abs(a.trace()));
  }
  r.checks.push_back(residual("random symmetric n=16, K=256: median relative error (20 seeds)", median(rel), 0.10));
  return r;
}

// 8. Fraction of updates with divergence ratio < 1, variant T with gating.
SuiteResult suite_table4() {
  SuiteResult r;
  std::vector<double> frac;
  for (int s = 0; s < 10; ++s) frac.push_back(run_training(lqr_task(Variant::t, s, 3000)).ratio_below_one);
  const double med = median(frac);
  r.checks.push_back({"median fraction of ratio < 1 (LQR, T + gate, 3000 steps, 10 seeds)", med, 0.60, med >= 0.60,
                      "pass iff >= bound"});
  return r;
}

// 9. Baseline / J / T against the Riccati optimum and the bowl optimum.
SuiteResult suite_convergence() {
  SuiteResult r;
  for (Variant v : {Variant::baseline, Variant::j, Variant::t}) {
    double worst = 0.0;
    for (int s = 0; s < 10; ++s) {
      const RunSummary sum = run_training(lqr_task(v, s, 6000));
      const double gap = sum.final_cost && sum.riccati_cost
                             ? *sum.final_cost / *sum.riccati_cost - 1.0
                             : std::numeric_limits<double>::infinity();
      worst = std::max(worst, std::isfinite(gap) ? gap : std::numeric_limits<double>::infinity());
    }
    r.checks.push_back(residual(fmt::format("LQR {}: worst cost / Riccati cost - 1 (10 seeds)", to_string(v)), worst,
                                0.05));
  }
  for (Variant v : {Variant::baseline, Variant::j, Variant::t}) {
    double worst = 0.0;
    for (int s = 0; s < 10; ++s) {
      const RunSummary sum = run_training(bowl_task(v, s, 400));
      const double dist = all_finite(sum.final_theta) ? sum.final_theta.norm() : std::numeric_limits<double>::infinity();
      worst = std::max(worst, dist);
    }
    r.checks.push_back(residual(fmt::format("bowl {}: worst |theta - theta*| (10 seeds)", to_string(v)), worst, 1e-2));
  }

  // Frozen zero-head metric: J must replay the baseline bit for bit.
  int mismatches = 0;
  for (bool lqr : {true, false}) {
    TrainConfig base = lqr ? lqr_task(Variant::baseline, 3, 3000) : bowl_task(Variant::baseline, 3, 100);
    base.record_theta = true;
    TrainConfig j = base;
    j.variant = Variant::j;
    j.freeze_metric = true;
    const RunSummary a = run_training(base);
    const RunSummary b = run_training(j);
    if (a.theta_history.size() != b.theta_history.size()) {
      ++mismatches;
      continue;
    }
    for (std::size_t i = 0; i < a.theta_history.size(); ++i) {
      const Vector& x = a.theta_history[i];
      const Vector& y = b.theta_history[i];
      if (x.size() != y.size() || !std::equal(x.data(), x.data() + x.size(), y.data())) ++mismatches;
    }
  }
  r.checks.push_back(residual("zero-head frozen J vs baseline: differing theta iterates", mismatches, 0.0));
  return r;
}

// Part of criterion 10: two identical runs give the same CSV apart from wall time.
SuiteResult suite_determinism() {
  SuiteResult r;
  std::vector<std::pair<std::string, TrainConfig>> cases;
  cases.emplace_back("lqr T", lqr_task(Variant::t, 7, 500));
  cases.emplace_back("bowl J", bowl_task(Variant::j, 7, 10));
  TrainConfig pm;
  pm.env.kind = rl::EnvKind::pointmass;
  pm.env.horizon = 50;
  pm.backend = GradientBackend::reinforce;
  pm.variant = Variant::j;
  pm.policy.hidden = {4};
  pm.policy.head = rl::PolicyHead::gaussian;
  pm.episodes = 4;
  pm.batch_size = 4;
  pm.total_steps = 150;
  pm.probes.probe_count = 4;
  pm.metric_iters = 3;
  pm.seed = 7;
  cases.emplace_back("pointmass reinforce J", pm);
  for (const auto& [label, cfg] : cases) {
    const std::string a = strip_wall_time(run_to_csv(cfg));
    const std::string b = strip_wall_time(run_to_csv(cfg));
    r.checks.push_back({fmt::format("{}: identical CSV (wall time excluded)", label), a == b ? 0.0 : 1.0, 0.0, a == b,
                        fmt::format("{} bytes", a.size())});
  }
  return r;
}

}  // namespace

bool SuiteResult::passed() const {
  return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

const std::vector<SuiteInfo>& all_suites() {
  static const std::vector<SuiteInfo> table = {
      {"sherman-morrison", "rank-one inverse and determinant lemma", true, &suite_sherman_morrison},
      {"prop1", "divergence vs Laplace-Beltrami and covariant Laplacian", true, &suite_prop1},
      {"prop2", "exp(A) from the SVD of an antisymmetric A", true, &suite_prop2},
      {"prop3", "low-frequency rotation", true, &suite_prop3},
      {"prop4", "geodesic-regularized gradient", true, &suite_prop4},
      {"algorithm1", "metric-net training on diag(1..8)", true, &suite_algorithm1},
      {"hutchinson", "Hutchinson Hessian-trace estimates", true, &suite_hutchinson},
      {"determinism", "repeatable training logs", true, &suite_determinism},
      {"table4", "divergence-ratio fraction on LQR (slow)", false, &suite_table4},
      {"convergence", "baseline / J / T convergence (slow)", false, &suite_convergence},
  };
  return table;
}

const SuiteInfo* find_suite(std::string_view name) {
  for (const SuiteInfo& s : all_suites()) {
    if (name == s.name) return &s;
  }
  return nullptr;
}

SuiteResult run_suite(const SuiteInfo& suite) {
  const auto start = std::chrono::steady_clock::now();
  SuiteResult r = suite.run();
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  r.name = suite.name;
  r.title = suite.title;
  return r;
}

std::string format_suite(const SuiteResult& r) {
  std::string out = fmt::format("[{}] {}\n", r.name, r.title);
  for (const Check& c : r.checks) {
    out += fmt::format("  {}  {}: measured {:.3e}, bound {:.3e}{}\n", c.pass ? "pass" : "FAIL", c.name, c.measured,
                       c.bound, c.note.empty() ? "" : " (" + c.note + ")");
  }
  if (!r.skip_reason.empty()) out += fmt::format("  skipped {} fixture(s): {}\n", r.skipped, r.skip_reason);
  out += fmt::format("  => {} in {:.2f} s\n", r.passed() ? "PASS" : "FAIL", r.seconds);
  return out;
}

TrainConfig lqr_task(Variant variant, std::uint64_t seed, int total_steps) {
  TrainConfig c;
  c.env.kind = rl::EnvKind::lqr;
  c.env.horizon = 10;
  c.env.lqr = rl::LqrSpec::scalar(10, 0.0, 1.0);
  c.backend = GradientBackend::analytic;
  c.policy.hidden = {};
  c.policy.head = rl::PolicyHead::deterministic;
  c.policy.init_scale = 0.05;
  c.action_noise = 0.1;
  c.variant = variant;
  c.alpha = 0.01;
  c.kappa = 1e-5;
  c.probes.probe_count = 16;
  c.total_steps = total_steps;
  c.seed = seed;
  return c;
}

TrainConfig bowl_task(Variant variant, std::uint64_t seed, int updates) {
  TrainConfig c;
  c.env.kind = rl::EnvKind::landscape_quadratic;
  c.env.landscape_dim = 8;
  c.variant = variant;
  c.alpha = 0.2;
  c.kappa = 1e-5;
  c.probes.probe_count = 16;
  c.total_steps = updates * c.update_interval;
  c.seed = seed;
  return c;
}

std::string run_to_csv(const TrainConfig& cfg, RunSummary* summary) {
  std::ostringstream out;
  MetricsWriter writer(out);
  RunSummary s = run_training(cfg, [&writer](const StepRecord& rec) { writer.write(rec); });
  if (summary != nullptr) *summary = std::move(s);
  return out.str();
}

}  // namespace rpg::tools
