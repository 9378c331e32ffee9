#include <Eigen/Eigenvalues>
#include <algorithm>
#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/expint.hpp>
#include <cmath>
#include <random>

#include "klab/errors.hpp"
#include "klab/monotonicity.hpp"
#include "klab/radial.hpp"

namespace klab {

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 15>;

double sq_norm(const Point& z) {
  double r = 0.0;
  for (auto c : z) r += std::norm(c);
  return r;
}

// Catmull-Rom weights.
void cubic_weights(double t, double w[4]) {
  const double t2 = t * t, t3 = t2 * t;
  w[0] = 0.5 * (-t3 + 2 * t2 - t);
  w[1] = 0.5 * (3 * t3 - 5 * t2 + 2);
  w[2] = 0.5 * (-3 * t3 + 4 * t2 + t);
  w[3] = 0.5 * (t3 - t2);
}

double leading_log(const Poly1& q, std::vector<cplx>& roots) {
  double scale = 0.0;
  for (auto c : q) scale = std::max(scale, std::abs(c));
  if (scale == 0.0) return -HUGE_VAL;
  std::size_t d = q.size();
  while (d > 1 && std::abs(q[d - 1]) <= 1e-14 * scale) --d;
  Poly1 trimmed(q.begin(), q.begin() + d);
  roots = d > 1 ? poly_roots(trimmed) : std::vector<cplx>{};
  return std::log(std::abs(trimmed.back()));
}

// Jensen: mean of log|q| over |w| = s.
double jensen(const Poly1& q, double s) {
  std::vector<cplx> roots;
  double v = leading_log(q, roots);
  if (!std::isfinite(v)) return v;
  for (auto w : roots) v += std::log(std::max(std::abs(w), s));
  return v;
}

struct Integral {
  double value;
  double error;
};

Integral gk(const std::function<double(double)>& f, double a, double b, unsigned depth = 12, double tol = 1e-13) {
  double err = 0.0;
  const double v = GK::integrate(f, a, b, depth, tol, &err);
  return {v, err};
}

// Sphere mean of u about x with radius r.
Integral sphere_mean(const PshFunction& u, const Point& x, double r) {
  if (u.m == 1) {
    if (u.is_log_abs()) {
      // Jensen on p(x + w)
      Poly1 q{0.0};
      for (std::size_t k = 0; k < u.p1.size(); ++k) {
        Poly1 term{1.0};
        for (std::size_t j = 0; j < k; ++j) {
          Poly1 next(term.size() + 1, 0.0);
          for (std::size_t i = 0; i < term.size(); ++i) {
            next[i] += term[i] * x[0];
            next[i + 1] += term[i];
          }
          term = next;
        }
        if (q.size() < term.size()) q.resize(term.size(), 0.0);
        for (std::size_t i = 0; i < term.size(); ++i) q[i] += u.p1[k] * term[i];
      }
      const double v = jensen(q, r);
      return {v, 1e-14 * (1.0 + std::fabs(v))};
    }
    // Midpoint rule on the circle, doubled until settled.
    auto mean_n = [&](int n) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += u(Point{x[0] + std::polar(r, 2.0 * M_PI * (k + 0.5) / n)});
      return s / n;
    };
    double prev = mean_n(64);
    for (int n = 128; n <= (1 << 18); n *= 2) {
      const double cur = mean_n(n);
      if (std::fabs(cur - prev) <= 1e-14 * (1.0 + std::fabs(cur))) return {cur, std::fabs(cur - prev)};
      prev = cur;
      if (n == (1 << 18)) return {cur, std::fabs(cur - mean_n(n / 2))};
    }
    return {prev, HUGE_VAL};
  }
  if (u.m != 2) throw InputError("spherical_mean: m = 1 or 2");
  // z1 = x1 + r sqrt(t) e^{i a}, z2 = x2 + r sqrt(1 - t) e^{i b}; t uniform on S^3.
  double err = 0.0;
  auto over_t = [&](double t, double omt) {
    const double s1 = r * std::sqrt(t), s2 = r * std::sqrt(omt);
    auto over_a = [&](double a) {
      const cplx z1 = x[0] + std::polar(s1, a);
      if (u.is_log_abs()) return jensen(restrict_second(u.p2, z1, x[1]), s2);
      auto over_b = [&](double b) { return u(Point{z1, x[1] + std::polar(s2, b)}); };
      const auto ib = gk(over_b, 0.0, 2.0 * M_PI, 8, 1e-12);
      return ib.value / (2.0 * M_PI);
    };
    const auto ia = gk(over_a, 0.0, 2.0 * M_PI, 10, 1e-12);
    err = std::max(err, ia.error / (2.0 * M_PI));
    return ia.value / (2.0 * M_PI);
  };
  // t = v^3 (10 - 15 v + 6 v^2) flattens the log singularities at t = 0, 1
  auto over_v = [&](double v) {
    const double w = 1.0 - v;
    const double t = v * v * v * (10.0 - 15.0 * v + 6.0 * v * v);
    const double omt = w * w * w * (10.0 - 15.0 * w + 6.0 * w * w);
    const double jac = 30.0 * v * v * w * w;
    return jac == 0.0 ? 0.0 : jac * over_t(t, omt);
  };
  const auto it = gk(over_v, 0.0, 1.0, 15, 1e-13);
  return {it.value, it.error + err};
}

double fd_slope(const PshFunction& u, const Point& x, double r, double& err) {
  // dM/dlog r, five-point stencil in log r
  constexpr double d = 1e-2;
  double m[4], e = 0.0;
  const int off[4] = {-2, -1, 1, 2};
  for (int k = 0; k < 4; ++k) {
    const auto v = sphere_mean(u, x, r * std::exp(off[k] * d));
    m[k] = v.value;
    e += v.error;
  }
  err = 8.0 * e / (12.0 * d);
  return (m[0] - 8.0 * m[1] + 8.0 * m[2] - m[3]) / (12.0 * d);
}

void check_radii(const std::vector<double>& radii) {
  if (radii.empty()) throw InputError("no radii");
  for (std::size_t k = 0; k < radii.size(); ++k) {
    if (!(radii[k] > 0.0) || !std::isfinite(radii[k])) throw InputError("radii must be positive");
    if (k > 0 && !(radii[k] > radii[k - 1])) throw InputError("radii must increase");
  }
}

void check_log_uniform(const std::vector<double>& radii) {
  if (radii.size() < 3) throw InputError("need at least three radii");
  const double d = std::log(radii[1] / radii[0]);
  for (std::size_t k = 1; k < radii.size(); ++k)
    if (std::fabs(std::log(radii[k] / radii[k - 1]) - d) > 1e-9 * (1.0 + d))
      throw InputError("radii must be uniform in log r");
}

}  // namespace

PshFunction PshFunction::log_abs(const Poly1& p) {
  bool nz = false;
  for (auto c : p) nz = nz || c != 0.0;
  if (!nz) throw InputError("log|p|: p is identically zero");
  PshFunction u;
  u.kind = Kind::LogAbsPoly;
  u.m = 1;
  u.p1 = p;
  return u;
}

PshFunction PshFunction::log_abs(const Poly2& p) {
  bool nz = false;
  for (const auto& t : p) nz = nz || t.c != 0.0;
  if (!nz) throw InputError("log|p|: p is identically zero");
  PshFunction u;
  u.kind = Kind::LogAbsPoly;
  u.m = 2;
  u.p2 = p;
  return u;
}

PshFunction PshFunction::norm_sq(int m) {
  PshFunction u;
  u.kind = Kind::NormSq;
  u.m = m;
  return u;
}

PshFunction PshFunction::log_one_plus_norm_sq(int m) {
  PshFunction u;
  u.kind = Kind::LogOnePlusNormSq;
  u.m = m;
  return u;
}

PshFunction PshFunction::constant(double c, int m) {
  PshFunction u;
  u.kind = Kind::Constant;
  u.m = m;
  u.c = c;
  return u;
}

PshFunction PshFunction::max_of(const PshFunction& a, const PshFunction& b) {
  if (a.m != b.m) throw InputError("max: dimension mismatch");
  PshFunction u;
  u.kind = Kind::Max;
  u.m = a.m;
  u.parts = {a, b};
  return u;
}

PshFunction PshFunction::sublog(int m) {
  PshFunction u;
  u.kind = Kind::SubLog;
  u.m = m;
  return u;
}

PshFunction PshFunction::gridded(const std::function<double(cplx)>& f, double x0, double x1, double y0, double y1,
                                 int nx, int ny) {
  if (nx < 4 || ny < 4 || !(x1 > x0) || !(y1 > y0)) throw InputError("gridded: bad box");
  PshFunction u;
  u.kind = Kind::Gridded;
  u.m = 1;
  u.x0 = x0;
  u.x1 = x1;
  u.y0 = y0;
  u.y1 = y1;
  u.nx = nx;
  u.ny = ny;
  u.samples.resize(static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      u.samples[j * nx + i] = f(cplx(x0 + (x1 - x0) * i / (nx - 1), y0 + (y1 - y0) * j / (ny - 1)));
  for (double v : u.samples)
    if (!std::isfinite(v)) throw InputError("gridded: non-finite sample");
  // Spot check well inside the box.
  const double hw = 0.4 * std::min(x1 - x0, y1 - y0);
  PshFunction shifted = u;
  const double cx = 0.5 * (x0 + x1), cy = 0.5 * (y0 + y1);
  shifted.x0 -= cx;
  shifted.x1 -= cx;
  shifted.y0 -= cy;
  shifted.y1 -= cy;
  double scale = 0.0;
  for (double v : u.samples) scale = std::max(scale, std::fabs(v));
  if (psh_spot_check(shifted, hw, 1000, 1) < -1e-6 * std::max(1.0, scale))
    throw InputError("gridded: samples fail the plurisubharmonicity spot check");
  return u;
}

PshFunction PshFunction::from_tag(const std::string& tag) {
  if (tag == "log|z|") return log_abs(Poly1{0.0, 1.0});
  if (tag == "log|z1|") return log_abs(Poly2{{1.0, 1, 0}});
  if (tag == "log|z1z2|") return log_abs(Poly2{{1.0, 1, 1}});
  if (tag == "log|z2-z1^2|") return log_abs(Poly2{{1.0, 0, 1}, {-1.0, 2, 0}});
  if (tag == "log|z2^2-z1^3|") return log_abs(Poly2{{1.0, 0, 2}, {-1.0, 3, 0}});
  if (tag == "|z|^2") return norm_sq(1);
  if (tag == "|z|^2:2") return norm_sq(2);
  if (tag == "log(1+|z|^2)") return log_one_plus_norm_sq(1);
  if (tag == "max(log|z|,0)") return max_of(log_abs(Poly1{0.0, 1.0}), constant(0.0, 1));
  if (tag == "sublog") return sublog(1);
  throw InputError("unknown psh function '" + tag + "'");
}

double PshFunction::operator()(const Point& z) const {
  if (static_cast<int>(z.size()) != m) throw InputError("psh function: point dimension mismatch");
  switch (kind) {
    case Kind::LogAbsPoly:
      return m == 1 ? std::log(std::abs(poly_eval(p1, z[0]))) : std::log(std::abs(poly_eval(p2, z[0], z[1])));
    case Kind::NormSq: return sq_norm(z);
    case Kind::LogOnePlusNormSq: return std::log1p(sq_norm(z));
    case Kind::Constant: return c;
    case Kind::Max: return std::max(parts[0](z), parts[1](z));
    case Kind::SubLog: {
      const double r2 = sq_norm(z);
      return std::log1p(r2) / std::log(std::log(M_E + r2));
    }
    case Kind::Gridded: {
      const double fx = (z[0].real() - x0) / (x1 - x0) * (nx - 1), fy = (z[0].imag() - y0) / (y1 - y0) * (ny - 1);
      if (fx < 1.0 || fy < 1.0 || fx > nx - 2 || fy > ny - 2) throw InputError("gridded: point outside the box");
      const int i = std::min(static_cast<int>(fx), nx - 3), j = std::min(static_cast<int>(fy), ny - 3);
      double wx[4], wy[4];
      cubic_weights(fx - i, wx);
      cubic_weights(fy - j, wy);
      double v = 0.0;
      for (int b = 0; b < 4; ++b)
        for (int a = 0; a < 4; ++a) v += wy[b] * wx[a] * samples[(j - 1 + b) * nx + (i - 1 + a)];
      return v;
    }
  }
  return 0.0;
}

double psh_spot_check(const PshFunction& u, double half_width, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-half_width, half_width);
  const int m = u.m, n = 2 * m;
  double worst = HUGE_VAL;
  for (int k = 0; k < count; ++k) {
    Point z(m);
    for (auto& c : z) c = cplx(U(rng), U(rng));
    const double h = 1e-3 * (1.0 + std::sqrt(sq_norm(z)));
    auto at = [&](int a, double da, int b, double db) {
      Point w = z;
      auto bump = [&](int idx, double d) {
        if (idx % 2 == 0) w[idx / 2] += d; else w[idx / 2] += cplx(0.0, d);
      };
      bump(a, da);
      bump(b, db);
      return u(w);
    };
    Eigen::MatrixXd Hr(n, n);
    bool finite = std::isfinite(u(z));
    for (int a = 0; a < n && finite; ++a)
      for (int b = a; b < n; ++b) {
        const double v = (at(a, h, b, h) - at(a, h, b, -h) - at(a, -h, b, h) + at(a, -h, b, -h)) / (4 * h * h);
        if (!std::isfinite(v)) finite = false;
        Hr(a, b) = Hr(b, a) = v;
      }
    if (!finite) continue;
    Eigen::MatrixXcd Hc(m, m);
    for (int p = 0; p < m; ++p)
      for (int q = 0; q < m; ++q)
        Hc(p, q) = 0.25 * cplx(Hr(2 * p, 2 * q) + Hr(2 * p + 1, 2 * q + 1), Hr(2 * p, 2 * q + 1) - Hr(2 * p + 1, 2 * q));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Hc);
    worst = std::min(worst, es.eigenvalues()(0));
  }
  return worst;
}

SampledCurve spherical_mean(const PshFunction& u, const Point& x, const std::vector<double>& radii, bool solid) {
  check_radii(radii);
  if (static_cast<int>(x.size()) != u.m) throw InputError("spherical_mean: point dimension mismatch");
  if (u.m > 2) throw InputError("spherical_mean: m = 1 or 2");
  SampledCurve out;
  out.r = radii;
  for (double r : radii) {
    Integral v{0.0, 0.0};
    if (solid) {
      const int p = 2 * u.m;  // ball mean = (p / r^p) int_0^r s^{p-1} M(s) ds
      double e = 0.0;
      const auto in = gk(
          [&](double s) {
            const auto m = sphere_mean(u, x, s);
            e = std::max(e, m.error);
            return std::pow(s, p - 1) * m.value;
          },
          0.0, r, 10, 1e-10);
      v = {p * in.value / std::pow(r, p), e + p * in.error / std::pow(r, p)};
    } else {
      v = sphere_mean(u, x, r);
    }
    if (!std::isfinite(v.value)) throw InputError("spherical_mean: u = -inf on a set of positive measure");
    out.value.push_back(v.value);
    out.error.push_back(v.error);
  }
  return out;
}

IdentityResult logr_derivative_identity(const PshFunction& u, const AlgebraicCurve& curve, const Point& x,
                                        const std::vector<double>& radii) {
  check_radii(radii);
  if (!u.is_log_abs() || u.m != curve.m) throw InputError("identity: u must be log|p| for the curve's p");
  // Same zero set: the ratio of the two polynomials is constant.
  std::mt19937_64 rng(5);
  std::normal_distribution<double> N(0.0, 1.0);
  cplx ratio = 0.0;
  for (int k = 0; k < 4; ++k) {
    const cplx a(N(rng), N(rng)), b(N(rng), N(rng));
    const cplx pu = u.m == 1 ? poly_eval(u.p1, a) : poly_eval(u.p2, a, b);
    const cplx pc = u.m == 1 ? poly_eval(curve.p1, a) : poly_eval(curve.p, a, b);
    const cplx q = pu / pc;
    if (k == 0) ratio = q;
    if (std::abs(q - ratio) > 1e-9 * std::abs(ratio)) throw InputError("identity: u and curve do not match");
  }
  IdentityResult res;
  res.theta = density_theta(curve, x, radii).value;
  for (std::size_t k = 0; k < radii.size(); ++k) {
    double err = 0.0;
    res.slope.push_back(fd_slope(u, x, radii[k], err));
    res.max_gap = std::max(res.max_gap, std::fabs(res.slope.back() - res.theta[k]));
  }
  return res;
}

ConvexityResult logr_convexity_check(const PshFunction& u, const Point& x, const std::vector<double>& radii,
                                     double tol) {
  check_radii(radii);
  check_log_uniform(radii);
  const auto M = spherical_mean(u, x, radii);
  ConvexityResult res;
  res.min_second_diff = HUGE_VAL;
  for (std::size_t k = 1; k + 1 < radii.size(); ++k) {
    const double d = M.value[k + 1] - 2.0 * M.value[k] + M.value[k - 1];
    if (d < res.min_second_diff) {
      res.min_second_diff = d;
      res.error = M.error[k + 1] + 2.0 * M.error[k] + M.error[k - 1];
    }
  }
  res.holds = res.min_second_diff >= -tol - res.error;
  return res;
}

LiouvilleReport liouville_demo(const PshFunction& u, bool sublog_growth, const Point& x,
                               const std::vector<double>& radii) {
  check_log_uniform(radii);
  LiouvilleReport rep;
  rep.sublog = sublog_growth;
  rep.mean = spherical_mean(u, x, radii);
  for (double r : radii) {
    double e = 0.0;
    rep.slope.push_back(fd_slope(u, x, r, e));
  }
  rep.min_second_diff = HUGE_VAL;
  for (std::size_t k = 1; k + 1 < radii.size(); ++k)
    rep.min_second_diff =
        std::min(rep.min_second_diff, rep.mean.value[k + 1] - 2.0 * rep.mean.value[k] + rep.mean.value[k - 1]);
  rep.convex = rep.min_second_diff >= -1e-6;
  rep.final_slope = rep.slope.back();
  double max_slope = 0.0;
  for (double s : rep.slope) max_slope = std::max(max_slope, std::fabs(s));
  rep.flagged_constant = max_slope <= 1e-6;
  if (sublog_growth) {
    // Either constant, or Theta decaying over the second half of the range.
    bool decaying = true;
    for (std::size_t k = rep.slope.size() / 2; k + 1 < rep.slope.size(); ++k)
      decaying = decaying && rep.slope[k + 1] <= rep.slope[k] + 1e-9;
    // convex + sub-log => constant, so a non-constant sample cannot be convex
    rep.consistent = rep.flagged_constant ? rep.convex : (!rep.convex && decaying);
  } else {
    rep.consistent = rep.convex && !rep.flagged_constant;
  }
  return rep;
}

ParabolicResult parabolic_monotonicity_check(const Trajectory& traj, const std::vector<double>& rhos,
                                             const std::vector<double>& times, double tol) {
  if (times.size() < 3) throw InputError("parabolic check: need at least three times");
  if (rhos.empty()) throw InputError("parabolic check: no points");
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!(times[k] > 0.0)) throw InputError("parabolic check: times must be positive");
    if (k > 0 && !(times[k] > times[k - 1])) throw InputError("parabolic check: times must increase");
  }
  const auto& first = traj.states.at(0);
  if (!first.scalar) throw InputError("parabolic check: trajectory carries no scalar field");
  const auto& grid = first.metric.grid;
  {
    // Radial psh: u convex in s = log rho.
    const Differentiator D(grid);
    const auto uss = D.d2(*first.scalar);
    double scale = 0.0;
    for (double v : *first.scalar) scale = std::max(scale, std::fabs(v));
    for (int i = 3; i + 3 < grid.n; ++i)
      if (uss[i] < -1e-6 * std::max(1.0, scale)) throw InputError("parabolic check: initial data is not psh");
  }
  auto value = [&](const FlowState& s, double rho) {
    return rho == 0.0 ? origin_value(grid, *s.scalar) : interp_rho(grid, *s.scalar, rho);
  };
  ParabolicResult res;
  res.min_tw = HUGE_VAL;
  res.logt_convexity = HUGE_VAL;
  for (double rho : rhos) {
    if (rho < 0.0) throw InputError("parabolic check: rho must be >= 0");
    std::vector<double> u;
    for (double t : times) u.push_back(value(traj.states[traj.index_of(t)], rho));
    for (std::size_t k = 1; k + 1 < times.size(); ++k) {
      // u_{tau tau}, tau = log t, over up to five neighbouring snapshots; (t u_t)_t = u_{tau tau} / t
      const std::size_t lo = k >= 2 && k + 2 < times.size() ? k - 2 : k - 1;
      const std::size_t hi = lo == k - 2 ? k + 2 : k + 1;
      std::vector<double> nodes;
      for (std::size_t j = lo; j <= hi; ++j) nodes.push_back(std::log(times[j]));
      const auto w = fornberg_weights(std::log(times[k]), nodes, 2)[2];
      double utt = 0.0;
      for (std::size_t j = lo; j <= hi; ++j) utt += w[j - lo] * u[j];
      const double tw = utt / times[k];
      res.tw.push_back(tw);
      res.min_tw = std::min(res.min_tw, tw);
      res.logt_convexity = std::min(res.logt_convexity, utt);
    }
  }
  res.holds = res.min_tw >= -tol && res.logt_convexity >= -tol;
  return res;
}

Trajectory heat_potential_trajectory(const std::vector<double>& times, int grid_n) {
  if (times.empty()) throw InputError("heat potential: no times");
  const auto grid = RadialGrid::standard(grid_n);
  const double gamma = boost::math::constants::euler<double>();
  auto ein = [&](double x) {
    if (x > 2.0) return boost::math::expint(1, x) + gamma + std::log(x);
    // sum_{k>=1} (-1)^{k+1} x^k / (k k!)
    double term = 1.0, sum = 0.0;
    for (int k = 1; k < 60; ++k) {
      term *= x / k;
      const double add = (k % 2 ? 1.0 : -1.0) * term / k;
      sum += add;
      if (std::fabs(add) < 1e-18 * std::fabs(sum)) break;
    }
    return sum;
  };
  Trajectory traj;
  traj.tag = "heat-potential";
  for (double t : times) {
    if (!(t > 0.0)) throw InputError("heat potential: t must be positive");
    FlowState s;
    s.t = t;
    s.metric = metric_flat(1, grid);
    s.metric_flow = MetricFlow::Static;
    std::vector<double> u(grid.n);
    for (int i = 0; i < grid.n; ++i) u[i] = (ein(grid.rho(i) / t) - gamma + std::log(t)) / M_PI;
    s.scalar = u;
    traj.states.push_back(std::move(s));
  }
  return traj;
}

}  // namespace klab
