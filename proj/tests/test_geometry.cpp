#include <cmath>
#include <random>

#include "doctest.h"
#include "klab/errors.hpp"
#include "klab/geometry.hpp"

using namespace klab;

namespace {

double max_abs_diff(const std::vector<double>& v, double (*f)(double), const RadialGrid& g) {
  double e = 0.0;
  for (int i = 0; i < g.n; ++i) e = std::max(e, std::fabs(v[i] - f(g.rho(i))));
  return e;
}

double cigar_R(double rho) { return 1.0 / (1.0 + rho); }

}  // namespace

TEST_CASE("flat metric has zero curvature") {
  for (int m = 1; m <= 4; ++m) {
    const auto g = metric_flat(m);
    CHECK(g.b_at(0.3) == 1.0);
    const auto c = curvature(g);
    for (double v : c.scalar) CHECK(std::fabs(v) <= 1e-14);
    if (m <= 2) CHECK(bisectional_min(g) == 0.0);
  }
}

TEST_CASE("cigar metric and curvature") {
  const auto g = metric_cigar();
  CHECK(g.b_origin() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(g.b_at(1.0) == doctest::Approx(0.5).epsilon(1e-12));
  const auto c = curvature(g);
  CHECK(max_abs_diff(c.scalar, cigar_R, g.grid) <= 1e-10);
  CHECK(c.scalar_origin == doctest::Approx(1.0).epsilon(1e-10));
  const double bm = bisectional_min(g);
  CHECK(bm >= 0.0);
  CHECK(bm == doctest::Approx(1.0 / (1.0 + 1e4)).epsilon(1e-8));
  // Trace identity R = g^{a bbar} R_{a bbar}.
  for (int i = 0; i < g.grid.n; ++i) CHECK(std::fabs(c.scalar[i] - c.ric_rad[i] / g.b(i)) <= 1e-10);
}

TEST_CASE("constant-curvature fixtures") {
  const auto g1 = metric_fubini_study(1);
  const auto c1 = curvature(g1);
  for (double v : c1.scalar) CHECK(std::fabs(v - 2.0) <= 1e-10);
  CHECK(bisectional_min(g1) == doctest::Approx(2.0).epsilon(1e-10));

  const auto g2 = metric_fubini_study(2);
  const auto c2 = curvature(g2);
  for (int i = 0; i < g2.grid.n; ++i) {
    CHECK(std::fabs(c2.k11[i] - 2.0) <= 1e-9);
    CHECK(std::fabs(c2.k12[i] - 1.0) <= 1e-9);
    CHECK(std::fabs(c2.k22[i] - 2.0) <= 1e-9);
    CHECK(std::fabs(c2.ric_rad[i] / g2.b(i) - 3.0) <= 1e-9);
    CHECK(std::fabs(c2.ric_sph[i] / g2.a(i) - 3.0) <= 1e-9);
    CHECK(std::fabs(c2.scalar[i] - (c2.ric_rad[i] / g2.b(i) + c2.ric_sph[i] / g2.a(i))) <= 1e-10);
  }
  CHECK(bisectional_min(g2) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK_THROWS_AS(bisectional_min(metric_fubini_study(3)), InputError);
}

TEST_CASE("curvature error shrinks at least 8x when the spacing halves") {
  // Sampled (trend-free) cigar profile, so the differences do real work.
  auto err = [](int n) {
    auto g = metric_cigar(RadialGrid::log_uniform(1e-2, 1e2, n));
    for (int i = 0; i < n; ++i) g.rem_b[i] = g.log_b(i);
    g.kappa_b = 0.0;
    return max_abs_diff(curvature(g).scalar, cigar_R, g.grid);
  };
  const double e1 = err(48), e2 = err(95);
  CHECK(e2 > 0.0);
  CHECK(e1 / e2 >= 8.0);
}

TEST_CASE("distance and Hessian comparison") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  const auto flat = metric_flat(2);
  std::vector<Point> samples;
  for (int k = 0; k < 20; ++k) samples.push_back({{u(rng), u(rng)}, {u(rng), u(rng)}});
  CHECK(hessian_comparison_check(flat, Point{{0.5, -1.0}, {0.2, 0.0}}, samples) == 0.0);

  const auto cigar = metric_cigar();
  const auto df = distance_from_origin(cigar);
  double derr = 0.0, herr = 0.0;
  for (int i = 0; i < cigar.grid.n; ++i) {
    const double r = std::sqrt(cigar.grid.rho(i));
    const double d = std::asinh(r);
    const double q = 1.0 + r * r;
    // d/dr(sqrt b) = -r q^{-3/2}
    const double rad = 0.5 * d / (r * std::sqrt(q)) + 0.5 / q - 0.5 * d * r / std::pow(q, 1.5);
    derr = std::max(derr, std::fabs(df.d[i] - d));
    herr = std::max(herr, std::fabs(df.hess_rad[i] - rad));
  }
  CHECK(derr <= 1e-8);
  CHECK(herr <= 1e-8);

  std::vector<Point> s1;
  for (int k = 0; k < 50; ++k) s1.push_back({{u(rng) * 10, u(rng) * 10}});
  CHECK(hessian_comparison_check(cigar, Point{{0.0, 0.0}}, s1) <= 1e-6);
  CHECK(hessian_comparison_check(metric_fubini_study(1), Point{{0.0, 0.0}}, s1) <= 1e-6);
  CHECK_THROWS_AS(hessian_comparison_check(cigar, Point{{0.0, 0.0}}, {Point{{0.0, 0.0}}}), InputError);
}

TEST_CASE("Jacobian identity for the flat exponential map") {
  SmoothFunction zero{[](const Eigen::VectorXd&) { return 0.0; }, {}};
  auto r = jacobian_identity_check(zero, Eigen::Vector2d(0.3, -0.1));
  CHECK(r.lhs == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(r.rhs == doctest::Approx(1.0).epsilon(1e-10));

  const double eps = 0.1;
  SmoothFunction quad{[eps](const Eigen::VectorXd& x) { return eps * x.squaredNorm(); }, {}};
  r = jacobian_identity_check(quad, Eigen::Vector2d(0.7, 0.2));
  CHECK(r.lhs == doctest::Approx(1.44).epsilon(1e-9));
  CHECK(r.rhs == doctest::Approx(1.44).epsilon(1e-9));

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Vector4d c(u(rng), u(rng), u(rng), u(rng));
    const double amp = 0.1 * (1.0 + u(rng));
    SmoothFunction bump{[c, amp](const Eigen::VectorXd& x) { return amp * std::exp(-(x - c).squaredNorm()); }, {}};
    const Eigen::Vector4d x(u(rng), u(rng), u(rng), u(rng));
    r = jacobian_identity_check(bump, x);
    CHECK(std::fabs(r.lhs - r.rhs) <= 1e-6);
  }

  // x + grad v = -x in R^3 reverses orientation.
  SmoothFunction fold{[](const Eigen::VectorXd& x) { return -x.squaredNorm(); }, {}};
  CHECK_THROWS_AS(jacobian_identity_check(fold, Eigen::Vector3d(0.0, 0.0, 0.0)), InputError);
}

TEST_CASE("expanding soliton construction") {
  auto [flat, gauss] = expanding_soliton_construct(1, 2.0, 0.0);
  CHECK(flat.flat);
  CHECK(gauss.soliton_residual == 0.0);
  CHECK(gauss.potential[100] == doctest::Approx(flat.grid.rho(100) / 2.0));

  auto [g, spec] = expanding_soliton_construct(1, 1.0, 0.5);
  MESSAGE("soliton_eq residual " << spec.soliton_residual << ", holomorphy residual " << spec.holomorphy_residual);
  CHECK(spec.soliton_residual <= 1e-8);
  CHECK(spec.holomorphy_residual <= 1e-8);
  for (int i = 0; i < g.grid.n; ++i) CHECK(g.b(i) > 0.0);
  CHECK(g.b(g.grid.n - 1) < 1.0);
  // Recomputed independently of the constructor.
  CHECK(soliton_equation_residual(g, spec.potential, 1.0, 1e4) == doctest::Approx(spec.soliton_residual));
  // A wrong reference time is detected.
  CHECK(soliton_equation_residual(g, spec.potential, 2.0, 1e4) > 0.1);

  CHECK_THROWS_AS(expanding_soliton_construct(2, 1.0, 0.5), InputError);
  CHECK_THROWS_AS(expanding_soliton_construct(1, -1.0, 0.5), InputError);
}

TEST_CASE("cigar is a steady soliton") {
  const auto cigar = metric_cigar();
  const auto spec = steady_cigar_soliton(cigar);
  CHECK(spec.soliton_residual <= 1e-8);
  CHECK(spec.holomorphy_residual <= 1e-8);
}
