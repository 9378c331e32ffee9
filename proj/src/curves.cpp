#include <Eigen/Eigenvalues>
#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <random>

#include "klab/errors.hpp"
#include "klab/monotonicity.hpp"

namespace klab {

cplx poly_eval(const Poly1& p, cplx z) {
  cplx v = 0.0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) v = v * z + *it;
  return v;
}

Poly1 poly_derivative(const Poly1& p) {
  Poly1 d;
  for (std::size_t k = 1; k < p.size(); ++k) d.push_back(static_cast<double>(k) * p[k]);
  return d;
}

std::vector<cplx> poly_roots(const Poly1& p_in) {
  Poly1 p = p_in;
  double scale = 0.0;
  for (auto c : p) scale = std::max(scale, std::abs(c));
  while (!p.empty() && std::abs(p.back()) <= 1e-300 + 1e-15 * scale) p.pop_back();
  if (p.empty()) throw InputError("poly_roots: zero polynomial");
  const int d = static_cast<int>(p.size()) - 1;
  std::vector<cplx> roots;
  if (d == 0) return roots;
  Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(d, d);
  for (int k = 0; k < d; ++k) C(0, k) = -p[d - 1 - k] / p[d];
  for (int k = 1; k < d; ++k) C(k, k - 1) = 1.0;
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(C, false);
  const Poly1 dp = poly_derivative(p);
  for (int k = 0; k < d; ++k) {
    cplx z = es.eigenvalues()(k);
    for (int it = 0; it < 3; ++it) {
      const cplx f = poly_eval(p, z), fp = poly_eval(dp, z);
      if (std::abs(fp) == 0.0) break;
      const cplx step = f / fp;
      if (!(std::abs(step) < 1e-3 * (1.0 + std::abs(z)))) break;  // multiple root: keep eigenvalue
      z -= step;
    }
    roots.push_back(z);
  }
  return roots;
}

namespace {

Poly1 poly_mul(const Poly1& a, const Poly1& b) {
  Poly1 c(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
  return c;
}

Poly1 poly_pow_linear(cplx a, cplx b, int n) {  // (a + b w)^n
  Poly1 out{1.0};
  for (int k = 0; k < n; ++k) out = poly_mul(out, Poly1{a, b});
  return out;
}

void accumulate(Poly1& acc, const Poly1& t) {
  if (acc.size() < t.size()) acc.resize(t.size(), 0.0);
  for (std::size_t k = 0; k < t.size(); ++k) acc[k] += t[k];
}

// Taylor coefficients of p at z0: p(z0 + w) = sum b_j w^j.
Poly1 taylor_shift(const Poly1& p, cplx z0) {
  Poly1 out;
  Poly1 d = p;
  double fact = 1.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    out.push_back(poly_eval(d, z0) / fact);
    d = poly_derivative(d);
    fact *= static_cast<double>(j + 1);
  }
  return out;
}

const auto& gl16() {
  static const boost::math::quadrature::gauss<double, 16> q;
  return q;
}

void check_radii(const std::vector<double>& radii) {
  if (radii.empty()) throw InputError("no radii");
  for (std::size_t k = 0; k < radii.size(); ++k) {
    if (!(radii[k] > 0.0) || !std::isfinite(radii[k])) throw InputError("radii must be positive");
    if (k > 0 && !(radii[k] > radii[k - 1])) throw InputError("radii must increase");
  }
}

void check_curve_point(const AlgebraicCurve& c, const Point& x) {
  if (static_cast<int>(x.size()) != c.m) throw InputError("point dimension does not match the curve");
}

// Branch geometry around a centre zeta0: phi(zeta0 + s e^{i th}) - x and phi'.
struct RayBranch {
  std::vector<Poly1> shifted;  // per component, Taylor coefficients minus x at j = 0
  std::vector<Poly1> deriv;    // per component, Taylor coefficients of phi'
};

RayBranch ray_branch(const AlgebraicCurve::Branch& br, cplx zeta0, const Point& x) {
  RayBranch rb;
  const Poly1* comps[2] = {&br.z1, &br.z2};
  for (int k = 0; k < 2; ++k) {
    Poly1 s = taylor_shift(*comps[k], zeta0);
    s[0] -= x[k];
    rb.shifted.push_back(s);
    rb.deriv.push_back(taylor_shift(poly_derivative(*comps[k]).empty() ? Poly1{0.0} : poly_derivative(*comps[k]),
                                    zeta0));
  }
  return rb;
}

// |sum a_j s^j|^2 summed over components as a real polynomial in s.
std::vector<double> abs2_poly(const std::vector<Poly1>& comps, double th) {
  std::size_t deg = 0;
  for (const auto& c : comps) deg = std::max(deg, c.size());
  std::vector<double> out(2 * deg, 0.0);
  for (const auto& c : comps) {
    std::vector<cplx> a(c.size());
    for (std::size_t j = 0; j < c.size(); ++j) a[j] = c[j] * std::polar(1.0, j * th);
    for (std::size_t j = 0; j < a.size(); ++j)
      for (std::size_t l = 0; l < a.size(); ++l) out[j + l] += (a[j] * std::conj(a[l])).real();
  }
  return out;
}

double real_eval(const std::vector<double>& c, double s) {
  double v = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * s + *it;
  return v;
}

// Intervals of s > 0 where f(s) < 0.
std::vector<std::pair<double, double>> negative_intervals(const std::vector<double>& f) {
  Poly1 pc(f.begin(), f.end());
  std::vector<double> cuts{0.0};
  for (auto z : poly_roots(pc)) {
    if (z.real() > 0.0 && std::fabs(z.imag()) <= 1e-6 * (1.0 + std::abs(z))) {
      double s = z.real();
      // polish on the real line
      std::vector<double> df;
      for (std::size_t k = 1; k < f.size(); ++k) df.push_back(k * f[k]);
      for (int it = 0; it < 4; ++it) {
        const double d = real_eval(df, s);
        if (d == 0.0) break;
        const double step = real_eval(f, s) / d;
        if (!(std::fabs(step) < 1e-2 * s)) break;
        s -= step;
      }
      cuts.push_back(s);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  std::vector<std::pair<double, double>> out;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double a = cuts[k], b = cuts[k + 1];
    if (b <= a) continue;
    if (real_eval(f, 0.5 * (a + b)) < 0.0) {
      if (!out.empty() && out.back().second == a) {
        out.back().second = b;
      } else {
        out.emplace_back(a, b);
      }
    }
  }
  return out;
}

cplx best_centre(const AlgebraicCurve::Branch& br, const Point& x) {
  std::vector<cplx> cand{0.0};
  const Poly1* comps[2] = {&br.z1, &br.z2};
  for (int k = 0; k < 2; ++k) {
    Poly1 q = *comps[k];
    if (q.size() < 2) continue;
    q[0] -= x[k];
    bool nonconst = false;
    for (std::size_t j = 1; j < q.size(); ++j) nonconst = nonconst || std::abs(q[j]) > 0.0;
    if (!nonconst) continue;
    for (auto z : poly_roots(q)) cand.push_back(z);
  }
  cplx best = 0.0;
  double bd = HUGE_VAL;
  for (auto z : cand) {
    const double d = std::norm(poly_eval(br.z1, z) - x[0]) + std::norm(poly_eval(br.z2, z) - x[1]);
    if (d < bd) {
      bd = d;
      best = z;
    }
  }
  return best;
}

// Area of the branch inside B_x(r) with `angles` rays; also the value with
// every other ray (for the error estimate).
std::pair<double, double> branch_area(const AlgebraicCurve::Branch& br, const Point& x, double r, int angles) {
  const cplx z0 = best_centre(br, x);
  const auto rb = ray_branch(br, z0, x);
  double full = 0.0, half = 0.0;
  for (int k = 0; k < angles; ++k) {
    const double th = 2.0 * M_PI * k / angles;
    auto f = abs2_poly(rb.shifted, th);
    f[0] -= r * r;
    const auto g = abs2_poly(rb.deriv, th);
    double ray = 0.0;
    for (const auto& [a, b] : negative_intervals(f))
      ray += gl16().integrate([&](double s) { return real_eval(g, s) * s; }, a, b);
    full += ray;
    if (k % 2 == 0) half += ray;
  }
  return {2.0 * M_PI * full / angles, 2.0 * M_PI * half / (angles / 2)};
}

}  // namespace

Poly1 restrict_second(const Poly2& p, cplx z1, cplx z2) {
  Poly1 out{0.0};
  for (const auto& t : p) {
    Poly1 term = poly_pow_linear(z2, 1.0, t.j);
    const cplx f = t.c * std::pow(z1, t.i);
    for (auto& v : term) v *= f;
    accumulate(out, term);
  }
  return out;
}

cplx poly_eval(const Poly2& p, cplx z1, cplx z2) {
  cplx v = 0.0;
  for (const auto& t : p) v += t.c * std::pow(z1, t.i) * std::pow(z2, t.j);
  return v;
}

AlgebraicCurve AlgebraicCurve::line(cplx a, cplx b) {
  if (std::abs(a) + std::abs(b) == 0.0) throw InputError("line: a = b = 0");
  const double n = std::sqrt(std::norm(a) + std::norm(b));
  AlgebraicCurve c;
  c.tag = "line";
  c.p = {{a, 1, 0}, {b, 0, 1}};
  c.branches.push_back({{0.0, -b / n}, {0.0, a / n}});
  return c;
}

AlgebraicCurve AlgebraicCurve::node() {
  AlgebraicCurve c;
  c.tag = "node";
  c.p = {{1.0, 1, 1}};
  c.branches.push_back({{0.0, 1.0}, {0.0}});
  c.branches.push_back({{0.0}, {0.0, 1.0}});
  return c;
}

AlgebraicCurve AlgebraicCurve::parabola() {
  auto c = graph({0.0, 0.0, 1.0});
  c.tag = "parabola";
  return c;
}

AlgebraicCurve AlgebraicCurve::cusp() {
  AlgebraicCurve c;
  c.tag = "cusp";
  c.p = {{1.0, 0, 2}, {-1.0, 3, 0}};
  c.branches.push_back({{0.0, 0.0, 1.0}, {0.0, 0.0, 0.0, 1.0}});
  return c;
}

AlgebraicCurve AlgebraicCurve::graph(const Poly1& f) {
  if (f.empty()) throw InputError("graph: empty polynomial");
  for (auto v : f)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw InputError("graph: non-finite coefficient");
  AlgebraicCurve c;
  c.tag = "graph";
  c.p = {{1.0, 0, 1}};
  for (std::size_t k = 0; k < f.size(); ++k)
    if (f[k] != 0.0) c.p.push_back({-f[k], static_cast<int>(k), 0});
  c.branches.push_back({{0.0, 1.0}, f});
  return c;
}

AlgebraicCurve AlgebraicCurve::zeros(const Poly1& p) {
  bool nonzero = false;
  for (auto v : p) nonzero = nonzero || v != 0.0;
  if (!nonzero) throw InputError("zeros: zero polynomial");
  AlgebraicCurve c;
  c.tag = "zeros";
  c.m = 1;
  c.p1 = p;
  return c;
}

AlgebraicCurve AlgebraicCurve::from_tag(const std::string& tag) {
  if (tag == "line" || tag == "z1") return line(1.0, 0.0);  // z1 = 0
  if (tag == "node" || tag == "z1z2" || tag == "z1*z2") return node();
  if (tag == "parabola" || tag == "z2-z1^2") return parabola();
  if (tag == "cusp" || tag == "z2^2-z1^3") return cusp();
  throw InputError("unknown curve '" + tag + "'");
}

AlgebraicCurve AlgebraicCurve::scaled(double c) const {
  if (!(c > 0.0)) throw InputError("scale factor must be positive");
  AlgebraicCurve out = *this;
  for (auto& br : out.branches) {
    for (auto& v : br.z1) v *= c;
    for (auto& v : br.z2) v *= c;
  }
  for (auto& t : out.p) t.c /= std::pow(c, t.i + t.j);
  if (m == 1) {
    for (std::size_t k = 0; k < out.p1.size(); ++k) out.p1[k] /= std::pow(c, static_cast<double>(k));
  }
  return out;
}

Point AlgebraicCurve::at(std::size_t branch, cplx zeta) const {
  const auto& br = branches.at(branch);
  return {poly_eval(br.z1, zeta), poly_eval(br.z2, zeta)};
}

SampledCurve density_theta(const AlgebraicCurve& curve, const Point& x, const std::vector<double>& radii,
                           int angles) {
  check_radii(radii);
  check_curve_point(curve, x);
  if (angles < 8 || angles % 2 != 0) throw InputError("density_theta: angles must be even and >= 8");
  SampledCurve out;
  out.r = radii;
  if (curve.m == 1) {
    const auto roots = poly_roots(curve.p1);
    for (double r : radii) {
      int count = 0;
      for (auto w : roots) count += std::abs(w - x[0]) < r;
      out.value.push_back(count);
      out.error.push_back(0.0);
    }
    return out;
  }
  for (double r : radii) {
    double area = 0.0, coarse = 0.0;
    for (const auto& br : curve.branches) {
      const auto [a, h] = branch_area(br, x, r, angles);
      area += a;
      coarse += h;
    }
    const double norm = M_PI * r * r;
    out.value.push_back(area / norm);
    out.error.push_back(std::fabs(area - coarse) / norm + 1e-14 * area / norm);
  }
  return out;
}

SampledCurve density_theta_mc(const AlgebraicCurve& curve, const Point& x, const std::vector<double>& radii,
                              int samples, std::uint64_t seed) {
  check_radii(radii);
  check_curve_point(curve, x);
  if (curve.m != 2) throw InputError("density_theta_mc: curves in C^2 only");
  if (samples < 8) throw InputError("density_theta_mc: too few samples");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  SampledCurve out;
  out.r = radii;
  const int K = std::max(2, static_cast<int>(std::sqrt(samples / 2.0)));
  for (double r : radii) {
    double area = 0.0, var = 0.0;
    for (const auto& br : curve.branches) {
      const cplx z0 = best_centre(br, x);
      const auto rb = ray_branch(br, z0, x);
      // Parameter radius enclosing the region.
      double S = 0.0;
      for (int k = 0; k < 64; ++k) {
        auto f = abs2_poly(rb.shifted, 2.0 * M_PI * k / 64);
        f[0] -= r * r;
        for (const auto& iv : negative_intervals(f)) S = std::max(S, iv.second);
      }
      S *= 1.1;
      const double disc = M_PI * S * S;
      for (int i = 0; i < K; ++i) {
        for (int j = 0; j < K; ++j) {
          double vals[2];
          for (double& v : vals) {
            const double s = S * std::sqrt((i + U(rng)) / K), th = 2.0 * M_PI * (j + U(rng)) / K;
            const cplx zeta = z0 + std::polar(s, th);
            const auto p = curve.at(&br - curve.branches.data(), zeta);
            const bool inside = std::norm(p[0] - x[0]) + std::norm(p[1] - x[1]) < r * r;
            v = inside ? std::norm(poly_eval(poly_derivative(br.z1), zeta)) +
                             std::norm(poly_eval(poly_derivative(br.z2), zeta))
                       : 0.0;
          }
          const double cell = disc / (K * K);
          area += cell * 0.5 * (vals[0] + vals[1]);
          var += cell * cell * 0.25 * (vals[0] - vals[1]) * (vals[0] - vals[1]) / 2.0;
        }
      }
    }
    const double norm = M_PI * r * r;
    out.value.push_back(area / norm);
    out.error.push_back(1.96 * std::sqrt(var) / norm);
  }
  return out;
}

MonotonicityResult density_monotonicity_check(const AlgebraicCurve& curve, const Point& x,
                                              const std::vector<double>& radii, double tol) {
  if (radii.size() < 3) throw InputError("density_monotonicity_check: need at least three radii");
  const auto th = density_theta(curve, x, radii);
  MonotonicityResult res;
  res.min_slope = HUGE_VAL;
  for (std::size_t k = 1; k + 1 < radii.size(); ++k) {
    const double dr = radii[k + 1] - radii[k - 1];
    const double slope = (th.value[k + 1] - th.value[k - 1]) / dr;
    const double err = (th.error[k + 1] + th.error[k - 1]) / dr;
    if (slope < res.min_slope) {
      res.min_slope = slope;
      res.slope_error = err;
    }
  }
  res.holds = res.min_slope >= -tol - res.slope_error;
  return res;
}

int multiplicity_by_lines(const AlgebraicCurve& curve, const Point& x, int trials, std::uint64_t seed,
                          double radius) {
  check_curve_point(curve, x);
  if (trials < 1) throw InputError("multiplicity_by_lines: trials must be >= 1");
  if (curve.m == 1) {
    int count = 0;
    for (auto w : poly_roots(curve.p1)) count += std::abs(w - x[0]) < radius;
    return count;
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N(0.0, 1.0);
  std::vector<int> counts;
  for (int k = 0; k < trials; ++k) {
    cplx u1(N(rng), N(rng)), u2(N(rng), N(rng));
    const double un = std::sqrt(std::norm(u1) + std::norm(u2));
    u1 /= un;
    u2 /= un;
    const double off = 1e-3 * radius;
    const cplx q1 = x[0] + off * cplx(N(rng), N(rng)), q2 = x[1] + off * cplx(N(rng), N(rng));
    // p(q + zeta u) as a polynomial in zeta
    Poly1 g{0.0};
    for (const auto& t : curve.p) {
      Poly1 term = poly_mul(poly_pow_linear(q1, u1, t.i), poly_pow_linear(q2, u2, t.j));
      for (auto& v : term) v *= t.c;
      accumulate(g, term);
    }
    int count = 0;
    for (auto z : poly_roots(g)) count += std::abs(z) < radius;
    counts.push_back(count);
  }
  std::nth_element(counts.begin(), counts.begin() + counts.size() / 2, counts.end());
  return counts[counts.size() / 2];
}

std::vector<double> log_radii(double r0, double r1, int n) {
  if (!(r0 > 0.0) || !(r1 > r0) || n < 2) throw InputError("log_radii: need 0 < r0 < r1 and n >= 2");
  std::vector<double> r(n);
  for (int k = 0; k < n; ++k) r[k] = r0 * std::pow(r1 / r0, static_cast<double>(k) / (n - 1));
  return r;
}

}  // namespace klab
