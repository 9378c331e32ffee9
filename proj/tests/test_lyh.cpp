#include "doctest.h"

#include <cmath>
#include <random>

#include "klab/errors.hpp"
#include "klab/lyh.hpp"

using namespace klab;

namespace {

std::vector<double> steps(double a, double b, int n) {
  std::vector<double> t;
  for (int k = 0; k <= n; ++k) t.push_back(a + (b - a) * k / n);
  return t;
}

Point at_rho(double rho) { return Point{cplx(std::sqrt(rho), 0.0)}; }

const Trajectory& cigar_flow() {
  static const Trajectory tr = [] {
    FlowRunConfig c;
    c.initial = "cigar-ric";
    c.t_end = 1.0;
    c.stride = 0.01;
    return run_flow(c);
  }();
  return tr;
}

const Trajectory& cigar_flow_real() {
  static const Trajectory tr = [] {
    FlowRunConfig c;
    c.initial = "cigar-ric";
    c.t_end = 0.5;
    c.stride = 0.01;
    c.real_normalization = true;
    return run_flow(c);
  }();
  return tr;
}

const Trajectory& torus_flow() {
  static const Trajectory tr = [] {
    FlowRunConfig c;
    c.initial = "torus-he";
    c.t_end = 1.0;
    c.stride = 0.01;
    c.scheme.dt = 1e-3;
    return run_flow(c);
  }();
  return tr;
}

// Kernel identity w_t - |w_z|^2/w + w/t for w = e^{-rho/t}/(pi t).
double kernel_identity(double rho, double t) {
  const double w = heat_kernel(rho, t);
  const double w_t = w * (rho / (t * t) - 1.0 / t);
  const double wz2 = w * w * rho / (t * t);
  return w_t - wz2 / w + w / t;
}

}  // namespace

TEST_CASE("kinds round trip through their names") {
  for (auto k : {LyhKind::TraceRicci, LyhKind::TraceKahler, LyhKind::LinearZ, LyhKind::LinearQ, LyhKind::BundleTrace})
    CHECK(lyh_kind_from_string(to_string(k)) == k);
  CHECK_THROWS_AS(lyh_kind_from_string("nope"), InputError);
  CHECK(is_real_kind(LyhKind::LinearQ));
  CHECK_FALSE(is_real_kind(LyhKind::LinearZ));
}

TEST_CASE("lowering and raising round trip") {
  VectorFieldV V{{cplx(0.3, -1.2), cplx(2.0, 0.5)}};
  const std::vector<double> g{0.7, 3.1};
  const auto back = VectorFieldV::raised(V.lowered(g), g);
  for (int a = 0; a < 2; ++a) CHECK(std::abs(back.v[a] - V.v[a]) <= 1e-12);
  CHECK_THROWS_AS(V.lowered({1.0}), InputError);
}

TEST_CASE("flat static trajectories give zero trace quantities") {
  FlowRunConfig c;
  c.initial = "flat";
  c.t_end = 0.02;
  c.stride = 0.01;
  const auto tr = run_flow(c);
  for (double rho : {1e-3, 1.0, 50.0}) {
    const VectorFieldV V{{cplx(3.0, -7.0)}};
    CHECK(trace_harnack_kahler(tr, at_rho(rho), 0.01, V).value == 0.0);
  }
  const auto tr2 = analytic_trajectory("flat-g", {0.5, 1.0, 2.0}, 2);
  const Point z{cplx(0.4, 0.1), cplx(-1.0, 0.3)};
  CHECK(std::fabs(linear_trace_Z(tr2, z, 1.0, VectorFieldV{{0.0, 0.0}}).value - 2.0) <= 1e-14);
}

TEST_CASE("flat h = g: Z = H/t and the minimizer is zero") {
  const auto tr = analytic_trajectory("flat-g", {1.0, 2.0, 3.0});
  const auto e = linear_trace_Z(tr, at_rho(0.7), 2.0, VectorFieldV{{0.0}});
  CHECK(std::fabs(e.value - 0.5) <= 1e-14);
  CHECK(std::fabs(e.trace_h - 1.0) <= 1e-14);
  const auto mz = minimize_V(tr, LyhKind::LinearZ, at_rho(0.7), 2.0);
  CHECK(std::abs(mz.v.v[0]) <= 1e-12);
  CHECK(mz.eval.certified);
  CHECK_FALSE(mz.eval.regularized);
}

TEST_CASE("ancient value equals value minus the trace term") {
  const auto& tr = cigar_flow();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  for (int k = 0; k < 20; ++k) {
    const double rho = std::exp(U(rng) * 3.0);
    const VectorFieldV V{{cplx(U(rng), U(rng))}};
    const auto z = linear_trace_Z(tr, at_rho(rho), 0.5, V);
    CHECK(std::fabs(z.ancient_value + z.trace_h / 0.5 - z.value) <= 1e-12 * std::max(1.0, std::fabs(z.value)));
    const auto q = linear_trace_Q(cigar_flow_real(), at_rho(rho), 0.25, V);
    CHECK(std::fabs(q.ancient_value + q.trace_h / 0.5 - q.value) <= 1e-12 * std::max(1.0, std::fabs(q.value)));
  }
}

TEST_CASE("cigar soliton field attains the ancient equality") {
  const auto exact = analytic_trajectory("cigar-exact", steps(0.8, 1.2, 40));
  const auto exact_real = analytic_trajectory("cigar-exact-real", steps(0.4, 0.6, 20));
  for (double rho : {1e-3, 0.1, 1.0, 10.0, 90.0}) {
    const auto z = at_rho(rho);
    const VectorFieldV V{{z[0]}};
    CHECK(std::fabs(trace_harnack_kahler(exact, z, 1.0, V).ancient_value) <= 1e-4);
    CHECK(std::fabs(trace_harnack_ricci(exact_real, z, 0.5, V).ancient_value) <= 1e-4);
    CHECK(std::fabs(trace_harnack_kahler(cigar_flow(), z, 0.5, V).ancient_value) <= 1e-4);
    CHECK(std::fabs(trace_harnack_ricci(cigar_flow_real(), z, 0.25, V).ancient_value) <= 1e-4);
  }
}

TEST_CASE("cigar with V = 0 at t = 1: R_t + R >= 0") {
  const auto& tr = cigar_flow();
  const auto& grid = tr.states.front().metric.grid;
  double worst = 1.0;
  for (int i = 0; i < grid.n; i += 4) {
    if (grid.rho(i) > 1e2) break;
    worst = std::min(worst, trace_harnack_kahler(tr, at_rho(grid.rho(i)), 1.0, VectorFieldV{{0.0}}).value);
  }
  CHECK(worst >= -1e-6);
}

TEST_CASE("end snapshots use one-sided differences; two snapshots are not enough") {
  const auto& tr = cigar_flow();
  CHECK(trace_harnack_kahler(tr, at_rho(1.0), 1.0, VectorFieldV{{0.0}}).one_sided);
  CHECK_FALSE(trace_harnack_kahler(tr, at_rho(1.0), 0.5, VectorFieldV{{0.0}}).one_sided);
  const auto two = analytic_trajectory("cigar-exact", {1.0, 1.1});
  CHECK_THROWS_AS(trace_harnack_kahler(two, at_rho(1.0), 1.0, VectorFieldV{{0.0}}), InputError);
  CHECK_THROWS_AS(trace_harnack_kahler(tr, at_rho(1.0), 0.505, VectorFieldV{{0.0}}), InputError);
}

TEST_CASE("convention mismatches are rejected") {
  CHECK_THROWS_AS(trace_harnack_ricci(cigar_flow(), at_rho(1.0), 0.5, VectorFieldV{{0.0}}), InputError);
  CHECK_THROWS_AS(trace_harnack_kahler(cigar_flow_real(), at_rho(1.0), 0.25, VectorFieldV{{0.0}}), InputError);
  const auto plain = analytic_trajectory("cigar-exact", {0.9, 1.0, 1.1});
  CHECK_THROWS_AS(linear_trace_Z(plain, at_rho(1.0), 1.0, VectorFieldV{{0.0}}), InputError);
  CHECK_THROWS_AS(linear_trace_Z(cigar_flow(), at_rho(1.0), 0.0, VectorFieldV{{0.0}}), InputError);
}

TEST_CASE("expanding soliton: minimized trace vanishes at the initial time") {
  FlowRunConfig c;
  c.initial = "expanding-soliton";
  c.t_start = 1.0;
  c.t_end = 1.2;
  c.stride = 0.01;
  const auto tr = run_flow(c);
  REQUIRE_FALSE(tr.failed);
  const auto rep = lyh_scan(tr, LyhKind::TraceKahler, {1.0}, ScanRegion{});
  CHECK(std::fabs(rep.min_value) <= 1e-4);
  CHECK(rep.all_certified);
  REQUIRE(rep.residuals_available);
  CHECK(rep.residuals.soliton_eq <= 1e-3);
  CHECK(rep.residuals.holomorphy <= 1e-3);
}

TEST_CASE("heat kernel tensor: minimized Z vanishes and V* = z/t") {
  for (double rho : {0.01, 0.5, 2.0, 6.0})
    for (double t : {0.5, 1.0, 2.0}) CHECK(std::fabs(kernel_identity(rho, t)) <= 1e-8 * heat_kernel(0.0, t));
  const auto tr = analytic_trajectory("heat-kernel-tensor", {0.5, 1.0, 1.5});
  for (double rho : {0.01, 0.5, 2.0, 6.0}) {
    const auto z = at_rho(rho);
    const auto mz = minimize_V(tr, LyhKind::LinearZ, z, 1.0);
    CHECK(std::fabs(mz.eval.value) <= 1e-4);
    CHECK(std::abs(mz.v.v[0] - z[0] / 1.0) <= 1e-6 * std::abs(z[0]));
    CHECK(mz.eval.certified);
  }
}

TEST_CASE("real line kernel: minimized Q vanishes") {
  const auto line = LineField::heat_kernel({0.5, 1.0, 2.0});
  for (double x : {0.0, 0.4, -1.2, 3.0}) {
    const auto q = quadratic_linear_Q(line, x, 1.0);
    const auto mz = minimize_quadratic(q, LyhKind::LinearQ, Point{cplx(x, 0.0)});
    CHECK(std::fabs(mz.eval.value) <= 1e-4);
    CHECK(std::fabs(mz.v.v[0].real() - x / 2.0) <= 1e-4);
  }
  // analytic: w_t - w_x^2/w + w/(2t) with w_t = w_xx
  for (double x : {0.0, 0.4, -1.2, 3.0}) {
    const double t = 1.0, w = std::exp(-x * x / (4 * t)) / std::sqrt(4 * M_PI * t);
    const double wt = w * (x * x / (4 * t * t) - 0.5 / t), wx = -w * x / (2 * t);
    CHECK(std::fabs(wt - wx * wx / w + w / (2 * t)) <= 1e-8);
  }
  CHECK_THROWS_AS(quadratic_linear_Q(line, 0.0013, 1.0), InputError);
}

TEST_CASE("two separated kernels: minimized Q > 0 at the midpoint") {
  const auto line = LineField::two_kernels({0.25, 0.5, 1.0, 2.0}, 6.0);
  for (double t : line.times) {
    const auto mz = minimize_quadratic(quadratic_linear_Q(line, 0.0, t), LyhKind::LinearQ, Point{cplx(0.0)});
    CHECK(mz.eval.value > 1e-6 * heat_kernel(0.0, t));
  }
}

TEST_CASE("constant tensor on flat R^n: Q = n/2 at V = 0") {
  for (int n : {1, 2, 3, 5}) {
    const auto e = linear_trace_Q_constant(Eigen::MatrixXd::Identity(n, n), Eigen::VectorXd::Zero(n), 1.0);
    CHECK(std::fabs(e.value - n / 2.0) <= 1e-14);
  }
}

TEST_CASE("bundle trace") {
  SUBCASE("constant Omega = lambda, V = 0, t = 1") {
    FlowRunConfig c;
    c.initial = "torus-const";
    c.t_end = 1.1;
    c.stride = 0.1;
    c.torus_n = 32;
    const auto tr = run_flow(c);
    const auto e = bundle_trace_lyh(tr, Point{cplx(0.0, 0.0)}, 1.0, VectorFieldV{{0.0}});
    CHECK(std::fabs(e.value - 1.0) <= 1e-10);
  }
  SUBCASE("inequality scan on 1 + 0.5 cos x") {
    const auto rep = lyh_scan(torus_flow(), LyhKind::BundleTrace, {0.1, 0.5, 1.0}, ScanRegion{});
    CHECK(rep.min_value >= -1e-6);
    CHECK(rep.evaluations == 3u * 64u * 64u);
    CHECK(rep.all_certified);
  }
  SUBCASE("large V never beats the minimizer") {
    const auto& tr = torus_flow();
    const double h = tr.states.front().bundle->spacing();
    const Point x{cplx(5 * h, 17 * h)};
    const auto mz = minimize_V(tr, LyhKind::BundleTrace, x, 0.5);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> N(0.0, 1e3);
    for (int k = 0; k < 20; ++k) {
      const VectorFieldV V{{cplx(N(rng), N(rng))}};
      CHECK(bundle_trace_lyh(tr, x, 0.5, V).value >= mz.eval.value);
    }
  }
  SUBCASE("points must be grid nodes") {
    CHECK_THROWS_AS(bundle_trace_lyh(torus_flow(), Point{cplx(0.01, 0.0)}, 0.5, VectorFieldV{{0.0}}), InputError);
  }
}

TEST_CASE("negative initial Omega is rejected") {
  FlowRunConfig c;
  c.initial = "torus-const";
  c.t_end = 0.3;
  c.stride = 0.1;
  c.torus_n = 16;
  auto tr = run_flow(c);
  tr.states.front().bundle->omega0[3] = -0.5;
  CHECK_THROWS_AS(bundle_trace_lyh(tr, Point{cplx(0.0)}, 0.1, VectorFieldV{{0.0}}), InputError);
}

TEST_CASE("minimizer contract") {
  SUBCASE("degenerate h = 0 with no linear term") {
    LyhQuadratic q;
    q.b = Eigen::VectorXcd::Zero(2);
    q.A = Eigen::MatrixXcd::Zero(2, 2);
    const auto mz = minimize_quadratic(q, LyhKind::LinearZ, Point(2, cplx(0.0)));
    CHECK(mz.eval.regularized);
    CHECK(std::abs(mz.v.v[0]) + std::abs(mz.v.v[1]) == 0.0);
  }
  SUBCASE("indefinite h is unbounded below") {
    LyhQuadratic q;
    q.b = Eigen::VectorXcd::Zero(1);
    q.A = Eigen::MatrixXcd::Constant(1, 1, -1.0);
    CHECK_THROWS_AS(minimize_quadratic(q, LyhKind::LinearZ, Point(1, cplx(0.0))), InputError);
  }
  SUBCASE("Hermitian 2x2 closed form") {
    LyhQuadratic q;
    q.c = 1.0;
    q.b = Eigen::VectorXcd(2);
    q.b << cplx(1.0, 2.0), cplx(-0.5, 0.0);
    q.A = Eigen::MatrixXcd(2, 2);
    q.A << 2.0, cplx(0.5, 0.5), cplx(0.5, -0.5), 1.0;
    q.a_scale = 2.0;
    const auto mz = minimize_quadratic(q, LyhKind::LinearZ, Point(2, cplx(0.0)));
    const Eigen::Map<const Eigen::VectorXcd> v(mz.v.v.data(), 2);
    CHECK((q.A * v + q.b.conjugate()).norm() <= 1e-12);
    CHECK(mz.eval.certified);
    CHECK_FALSE(mz.eval.regularized);
  }
}

TEST_CASE("soliton residuals") {
  SUBCASE("flat Gaussian soliton V = z/t") {
    const auto tr = analytic_trajectory("flat-g", {0.5, 1.0, 2.0});
    const auto& grid = tr.states.front().metric.grid;
    RadialVectorField V{grid, std::vector<double>(grid.n, 1.0 / 2.0)};
    for (double rho : {1e-3, 1.0, 30.0}) {
      const auto r = soliton_residuals(tr, at_rho(rho), 2.0, V);
      CHECK(r.soliton_eq <= 1e-10);
      CHECK(r.holomorphy <= 1e-10);
      CHECK(r.y2 <= 1e-18);
    }
  }
  SUBCASE("cigar soliton, ancient") {
    const auto tr = analytic_trajectory("cigar-exact", steps(0.9, 1.1, 20));
    const auto& grid = tr.states.front().metric.grid;
    RadialVectorField V{grid, std::vector<double>(grid.n, 1.0)};
    for (double rho : {1e-3, 0.5, 5.0, 80.0}) {
      const auto r = soliton_residuals(tr, at_rho(rho), 1.0, V, true);
      CHECK(r.soliton_eq <= 1e-4);
      CHECK(r.holomorphy <= 1e-4);
      CHECK(r.y1 <= 1e-4);
      CHECK(r.y2 <= 1e-4);
    }
    const auto field = minimizing_field(tr, LyhKind::TraceKahler, 1.0);
    for (int i = 0; i < grid.n; i += 64)
      if (grid.rho(i) < 1e2) CHECK(std::fabs(field.phi[i] - 1.0) <= 1e-3);
  }
  SUBCASE("random field on the cigar is detected") {
    const auto tr = analytic_trajectory("cigar-exact", steps(0.9, 1.1, 20));
    const auto& grid = tr.states.front().metric.grid;
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(-2.0, 2.0);
    const double a = U(rng), b = U(rng), c = U(rng);
    RadialVectorField V{grid, std::vector<double>(grid.n)};
    for (int i = 0; i < grid.n; ++i) V.phi[i] = a + b * std::sin(c * grid.s(i));
    double worst = 0.0;
    for (int i = 0; i < grid.n; i += 16)
      if (grid.rho(i) < 1e2) worst = std::max(worst, soliton_residuals(tr, at_rho(grid.rho(i)), 1.0, V, true).soliton_eq);
    CHECK(worst > 0.1);
  }
}

TEST_CASE("scans") {
  SUBCASE("flat h = g: min = H/t_min") {
    const auto tr = analytic_trajectory("flat-g", {0.5, 1.0, 2.0});
    const auto rep = lyh_scan(tr, LyhKind::LinearZ, {1.0, 2.0}, ScanRegion{1e-2, 1e1, 8});
    CHECK(std::fabs(rep.min_value - 0.5) <= 1e-14);
    CHECK(rep.argmin_t == 2.0);
    CHECK(rep.residuals_available);
  }
  SUBCASE("heat-kernel equality") {
    const auto tr = analytic_trajectory("heat-kernel-tensor", {0.5, 1.0, 1.5});
    const auto rep = lyh_scan(tr, LyhKind::LinearZ, {1.0}, ScanRegion{1e-3, 20.0, 4});
    CHECK(std::fabs(rep.min_value) <= 1e-4);
    CHECK(rep.residuals.soliton_eq <= 1e-3);
    CHECK(rep.residuals.holomorphy <= 1e-3);
  }
  SUBCASE("cigar with h = Ric, ancient Z") {
    const auto rep = lyh_scan(cigar_flow(), LyhKind::LinearZ, {0.2, 0.5, 0.8}, ScanRegion{1e-4, 1e2, 4}, true);
    CHECK(rep.min_value >= -1e-4);
    CHECK(rep.min_value <= 1e-4);
    CHECK(rep.all_certified);
    CHECK(rep.residuals.soliton_eq <= 1e-3);
  }
  SUBCASE("empty region") {
    const auto tr = analytic_trajectory("flat-g", {0.5, 1.0, 2.0});
    CHECK_THROWS_AS(lyh_scan(tr, LyhKind::LinearZ, {1.0}, ScanRegion{5.0, 4.0, 1}), InputError);
    CHECK_THROWS_AS(lyh_scan(tr, LyhKind::LinearZ, {}, ScanRegion{}), InputError);
  }
}

TEST_CASE("nonnegativity of minimized Z and Q on flowing fixtures") {
  const auto z = lyh_scan(cigar_flow(), LyhKind::LinearZ, steps(0.1, 0.9, 8), ScanRegion{1e-4, 1e2, 8});
  CHECK(z.min_value >= -1e-4);
  const auto q = lyh_scan(cigar_flow_real(), LyhKind::LinearQ, steps(0.05, 0.45, 8), ScanRegion{1e-4, 1e2, 8});
  CHECK(q.min_value >= -1e-4);
  FlowRunConfig c;
  c.initial = "cigar-bump";
  c.t_end = 0.5;
  c.stride = 0.05;
  const auto bump = run_flow(c);
  const auto b = lyh_scan(bump, LyhKind::LinearZ, steps(0.1, 0.45, 7), ScanRegion{1e-4, 1e2, 8});
  CHECK(b.min_value >= -1e-4);
}

TEST_CASE("h = Ric reduces Z to the Kahler trace") {
  const auto tr = analytic_trajectory("cigar-exact-ric", steps(0.95, 1.05, 100));
  const auto tr_real = analytic_trajectory("cigar-exact-real-ric", steps(0.45, 0.55, 100));
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::normal_distribution<double> N(0.0, 1.0);
  double worst = 0.0, worst_real = 0.0;
  for (int k = 0; k < 50; ++k) {
    const double rho = std::exp(std::log(1e-4) + U(rng) * std::log(1e6));
    const int j = 1 + static_cast<int>(U(rng) * 99);
    const VectorFieldV V{{cplx(N(rng), N(rng))}};
    const auto z = at_rho(rho);
    const double t = tr.states[j].t;
    worst = std::max(worst, std::fabs(linear_trace_Z(tr, z, t, V).value - trace_harnack_kahler(tr, z, t, V).value));
    const double tr_t = tr_real.states[j].t;
    worst_real = std::max(worst_real, std::fabs(linear_trace_Q(tr_real, z, tr_t, V).value -
                                                0.5 * trace_harnack_ricci(tr_real, z, tr_t, V).value));
  }
  MESSAGE("reduction identity worst " << worst << " (real " << worst_real << ")");
  CHECK(worst <= 1e-8);
  CHECK(worst_real <= 1e-8);
}
