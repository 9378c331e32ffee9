#include <doctest.h>

#include <cmath>

#include "klab/errors.hpp"
#include "klab/harnack.hpp"

using namespace klab;

namespace {

const RealFunction kZero = [](const RealPoint&) { return 0.0; };

double r2(const RealPoint& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

}  // namespace

TEST_CASE("the Laplacian reproduces constants and affine data") {
  const BoxGrid g(1, 65, 1.0);
  const auto I = CoefficientField::identity(g);
  const auto one = solve_nondivergence(I, kZero, [](const RealPoint&) { return 1.0; }, 1.0);
  for (double v : one.u) CHECK(std::fabs(v - 1.0) <= 1e-12);
  CHECK(one.monotone);
  auto affine = [](const RealPoint& x) { return x[0] + 3.0; };
  const auto s = solve_nondivergence(I, kZero, affine, 1.0);
  for (std::size_t k = 0; k < g.size(); ++k) CHECK(std::fabs(s.u[k] - affine(g.point(k))) <= 1e-8);
}

TEST_CASE("affine data is exact for random coefficients in C^2") {
  const BoxGrid g(2, 13, 2.0);
  const auto F = CoefficientField::random(g, 1.0, 4.0, 3);
  auto affine = [](const RealPoint& x) { return x[0] - 0.5 * x[1] + 2.0 * x[3] + 6.0; };
  const auto s = solve_nondivergence(F, kZero, affine, 2.0);
  CHECK(s.monotone);
  for (std::size_t k = 0; k < g.size(); ++k) CHECK(std::fabs(s.u[k] - affine(g.point(k))) <= 1e-8);
}

TEST_CASE("random fields obey the discrete maximum principle") {
  for (int m : {1, 2}) {
    const BoxGrid g(m, m == 1 ? 65 : 11, 2.0);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const auto F = CoefficientField::random(g, 1.0, 4.0, seed);
      for (std::size_t k = 0; k < F.a.size(); k += 97) {
        const auto ev = eigenvalues(F.a[k]);
        CHECK(ev(0) >= 1.0 - 1e-12);
        CHECK(ev(ev.size() - 1) <= 4.0 + 1e-12);
      }
      const auto s = solve_nondivergence(F, kZero, [](const RealPoint& x) { return std::fabs(std::sin(3.0 * x[0])); }, 2.0);
      CHECK(s.min_interior >= -1e-12);
    }
  }
}

TEST_CASE("non-monotone stencils are rejected") {
  const BoxGrid g(2, 7, 1.0);
  Eigen::MatrixXcd a(2, 2);
  a << 1.0, cplx(0.7, 0.7), cplx(0.7, -0.7), 1.0;
  const auto F = CoefficientField::constant(g, HermitianMatrix(a));
  CHECK_THROWS_AS(solve_nondivergence(F, kZero, [](const RealPoint&) { return 1.0; }, 1.0), InputError);
}

TEST_CASE("ratio of the affine fixture and of constants") {
  const BoxGrid g(1, 129, 2.0);
  const auto I = CoefficientField::identity(g);
  const auto s = solve_nondivergence(I, kZero, [](const RealPoint& x) { return x[0] + 3.0; }, 2.0);
  const auto e = ball_extremes(s, 1.0);
  CHECK(std::fabs(e.ratio - 2.0) <= 1e-6);
  const auto c = solve_nondivergence(CoefficientField::random(g, 1.0, 4.0, 8), kZero,
                                     [](const RealPoint&) { return 2.5; }, 2.0);
  CHECK(std::fabs(ball_extremes(c, 1.0).ratio - 1.0) <= 1e-12);
}

TEST_CASE("ratios are invariant under scaling the data") {
  const BoxGrid g(1, 65, 2.0);
  const auto F = CoefficientField::random(g, 1.0, 4.0, 5);
  auto data = [](const RealPoint& x) { return 2.0 + std::cos(x[0]) * std::sin(2.0 * x[1]); };
  const auto a = ball_extremes(solve_nondivergence(F, kZero, data, 2.0), 1.0);
  const auto b = ball_extremes(solve_nondivergence(F, kZero, [&](const RealPoint& x) { return 7.0 * data(x); }, 2.0), 1.0);
  CHECK(a.ratio >= 1.0);
  CHECK(std::fabs(a.ratio - b.ratio) <= 1e-12 * a.ratio);
}

TEST_CASE("ratio distributions from disjoint seed sets agree") {
  ProbeConfig c;
  c.n = 65;
  c.trials = 100;
  c.seed = 1001;
  const auto a = harnack_ratio_probe(c);
  c.seed = 2002;
  const auto b = harnack_ratio_probe(c);
  CHECK(a.ratios.size() + a.discarded == 100);
  for (double r : a.ratios) CHECK((r >= 1.0 && std::isfinite(r)));
  CHECK(std::fabs(a.q90 - b.q90) <= 0.1 * std::max(a.q90, b.q90));
  CHECK(a.max >= a.q90);
}

TEST_CASE("volume inequality on the model fixtures") {
  const double R = 1.0;
  const BoxGrid g(1, 281, 7.0 * R);
  const auto I = CoefficientField::identity(g);
  const auto zero = volume_inequality_eval(kZero, I, R);
  CHECK(zero.lhs == doctest::Approx(M_PI).epsilon(1e-14));
  CHECK(zero.rhs == doctest::Approx(50.0 * M_PI).epsilon(1e-2));
  CHECK(zero.holds);
  // u = |x|^2 / (4 R^2): integrand (3/8)^2 on |x| <= sqrt(24) R
  const auto quad = volume_inequality_eval([&](const RealPoint& x) { return r2(x) / (4.0 * R * R); }, I, R);
  CHECK(quad.rhs == doctest::Approx(108.0 * M_PI).epsilon(1e-2));
  CHECK(quad.holds);
  CHECK_THROWS_AS(volume_inequality_eval([](const RealPoint&) { return -1.0; }, I, R), InputError);
  CHECK_THROWS_AS(volume_inequality_eval([](const RealPoint&) { return 2.0; }, I, R), InputError);
  CHECK_THROWS_AS(volume_inequality_eval(kZero, CoefficientField::identity(BoxGrid(1, 41, 3.0)), R), InputError);
}

TEST_CASE("contact set of the zero function is the identity") {
  const double R = 1.0;
  const BoxGrid g(1, 141, 7.0 * R);
  const auto E = contact_set_construct(kZero, R, g);
  CHECK(E.inside_5R);
  CHECK(E.below_6);
  CHECK(E.covers);
  CHECK_FALSE(E.boundary_hit);
  for (const auto& p : E.points) CHECK(r2({p.x[0] - p.y[0], p.x[1] - p.y[1]}) == 0.0);
  CHECK(E.contact_nodes.size() == E.points.size());

  const auto chain = contact_determinant_chain(kZero, CoefficientField::identity(g), R, E);
  CHECK(chain.holds);
  // 1 = 1 < 2 = 2 = 2 = 2 = 2: only the real-to-complex determinant step has slack
  for (std::size_t k = 0; k < chain.link_max.size(); ++k) {
    if (k == 1) CHECK(chain.link_max[k] == doctest::Approx(-0.5).epsilon(1e-10));
    else CHECK(std::fabs(chain.link_max[k]) <= 1e-10);
  }
}

TEST_CASE("contact points of a quadratic well") {
  const double R = 1.0, kappa = 0.6;
  const RealPoint p{0.5, -0.25};
  // u = kappa |x - p|^2 / (2 R^2): argmin (kappa p + y) / (1 + kappa)
  auto u = [&](const RealPoint& x) { return kappa * r2({x[0] - p[0], x[1] - p[1]}) / (2.0 * R * R); };
  const BoxGrid g(1, 141, 7.0 * R);
  const auto E = contact_set_construct(u, R, g, 2);
  CHECK(E.covers);
  CHECK(E.inside_5R);
  double mx = 0.0, my = 0.0, cx = 0.0;
  for (const auto& cp : E.points) {
    for (int i = 0; i < 2; ++i) {
      const double want = (kappa * p[i] + cp.y[i]) / (1.0 + kappa);
      CHECK(std::fabs(cp.x[i] - want) <= g.h());
    }
    mx += cp.x[0];
    my += cp.x[1];
    cx += cp.y[0];
  }
  mx /= E.points.size();
  my /= E.points.size();
  cx /= E.points.size();
  CHECK(mx > cx + 0.1);
  CHECK(my < -0.05);
  const auto chain = contact_determinant_chain(u, CoefficientField::random(g, 1.0, 4.0, 17), R, E);
  CHECK(chain.holds);
  CHECK(chain.max_violation <= 1e-8);
}

TEST_CASE("contact construction contracts") {
  const BoxGrid g(1, 71, 7.0);
  CHECK_THROWS_AS(contact_set_construct([](const RealPoint& x) { return 1.0 - r2(x); }, 1.0, g), InputError);
  // -0.9 |x|^2: D^2 w = (1 - 1.8) I is not PSD
  auto bad = [](const RealPoint& x) { return -0.9 * r2(x); };
  CHECK_THROWS_AS(contact_chain_at(bad, HermitianMatrix::identity(1), SpectrumBounds(1, 1), 1.0, {0.1, 0.2}, {0.0, 0.0}),
                  InputError);
}

TEST_CASE("random trials satisfy the volume inequality and the chain") {
  const auto t = harnack_random_trials(1, 141, 1.0, 1.0, 4.0, 50, 7);
  CHECK(t.trials == 50);
  CHECK(t.volume_violations == 0);
  CHECK(t.min_volume_margin > 1.0);
  CHECK(t.chain_violations == 0);
  CHECK(t.contact_points > 0);
  CHECK(t.coverage);
  const auto t2 = harnack_random_trials(2, 15, 1.0, 1.0, 4.0, 2, 7, 2);
  CHECK(t2.volume_violations == 0);
  CHECK(t2.chain_violations == 0);
}
