#include "klab/geometry.hpp"

#include <algorithm>
#include <array>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <limits>

#include "klab/errors.hpp"

namespace klab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double rho_of(const Point& z, const Point& y) {
  if (z.size() != y.size()) throw InputError("point dimension mismatch");
  double r = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k) r += std::norm(z[k] - y[k]);
  return r;
}

}  // namespace

void RadialKahlerMetric::validate() const {
  if (m < 1 || m > 4) throw InputError("RadialKahlerMetric: m must be in 1..4");
  if (static_cast<int>(rem_a.size()) != grid.n || static_cast<int>(rem_b.size()) != grid.n) {
    throw InputError("RadialKahlerMetric: profile length does not match grid");
  }
  if (!std::isfinite(kappa_a) || !std::isfinite(kappa_b)) throw InputError("RadialKahlerMetric: bad trend");
  for (int i = 0; i < grid.n; ++i) {
    if (!std::isfinite(rem_a[i]) || !std::isfinite(rem_b[i])) {
      throw InputError("RadialKahlerMetric: non-finite or non-positive profile");
    }
  }
  if (m >= 2 && std::fabs(origin_value(grid, rem_a) - origin_value(grid, rem_b)) > 1e-6) {
    throw InputError("RadialKahlerMetric: origin closure a(0) = b(0) violated");
  }
}

double RadialKahlerMetric::log_a(int i) const { return kappa_a * trend(grid.rho(i)) + rem_a[i]; }
double RadialKahlerMetric::log_b(int i) const { return kappa_b * trend(grid.rho(i)) + rem_b[i]; }

double RadialKahlerMetric::b_at(double rho) const {
  return std::exp(kappa_b * trend(rho) + interp_rho(grid, rem_b, rho));
}

double RadialKahlerMetric::a_at(double rho) const {
  return std::exp(kappa_a * trend(rho) + interp_rho(grid, rem_a, rho));
}

double RadialKahlerMetric::b_origin() const { return std::exp(origin_value(grid, rem_b)); }

std::vector<double> RadialKahlerMetric::log_b_values() const {
  std::vector<double> v(grid.n);
  for (int i = 0; i < grid.n; ++i) v[i] = log_b(i);
  return v;
}

LogDerivatives log_derivatives(const RadialKahlerMetric& metric) {
  const Differentiator D(metric.grid);
  // Shift by the innermost value: near the origin the remainders are nearly
  // constant and the e^{-s} factor magnifies rounding in their derivatives.
  auto shifted = [](std::vector<double> f) {
    const double f0 = f.front();
    for (auto& v : f) v -= f0;
    return f;
  };
  const auto ra = shifted(metric.rem_a), rb = shifted(metric.rem_b);
  LogDerivatives d{D.d1(ra), D.d2(ra), D.d1(rb), D.d2(rb)};
  for (int i = 0; i < metric.grid.n; ++i) {
    const double r = metric.grid.rho(i);
    d.la_s[i] += metric.kappa_a * trend_s(r);
    d.la_ss[i] += metric.kappa_a * trend_ss(r);
    d.lb_s[i] += metric.kappa_b * trend_s(r);
    d.lb_ss[i] += metric.kappa_b * trend_ss(r);
  }
  return d;
}

RadialKahlerMetric metric_flat(int m, const RadialGrid& grid) {
  RadialKahlerMetric g;
  g.m = m;
  g.grid = grid;
  g.rem_a.assign(grid.n, 0.0);
  g.rem_b.assign(grid.n, 0.0);
  g.tag = "flat";
  g.flat = true;
  g.validate();
  return g;
}

RadialKahlerMetric metric_cigar(const RadialGrid& grid) {
  RadialKahlerMetric g;
  g.m = 1;
  g.grid = grid;
  g.kappa_a = -1.0;
  g.kappa_b = -1.0;
  g.rem_a.resize(grid.n);
  g.rem_b.assign(grid.n, 0.0);
  for (int i = 0; i < grid.n; ++i) {
    const double r = grid.rho(i);
    // a = log(1+rho)/rho
    g.rem_a[i] = std::log(std::log1p(r) / r) + std::log1p(r);
  }
  g.tag = "cigar";
  g.validate();
  return g;
}

RadialKahlerMetric metric_fubini_study(int m, const RadialGrid& grid) {
  RadialKahlerMetric g;
  g.m = m;
  g.grid = grid;
  g.kappa_a = -1.0;
  g.kappa_b = -2.0;
  g.rem_a.assign(grid.n, 0.0);
  g.rem_b.assign(grid.n, 0.0);
  g.tag = "fubini-study";
  g.validate();
  return g;
}

CurvatureProfile curvature(const RadialKahlerMetric& metric) {
  metric.validate();
  const int n = metric.grid.n, m = metric.m;
  const auto ld = log_derivatives(metric);
  const auto &lb_s = ld.lb_s, &lb_ss = ld.lb_ss, &la_s = ld.la_s, &la_ss = ld.la_ss;

  CurvatureProfile c;
  c.m = m;
  c.ric_rad.resize(n);
  c.ric_sph.assign(n, 0.0);
  c.scalar.resize(n);
  c.k11.resize(n);
  c.k12.assign(n, 0.0);
  c.k22.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    const double es = std::exp(-metric.grid.s(i));
    const double a = metric.a(i), b = metric.b(i);
    const double F_s = (m - 1) * la_s[i] + lb_s[i];
    const double F_ss = (m - 1) * la_ss[i] + lb_ss[i];
    c.ric_rad[i] = -es * F_ss;
    c.scalar[i] = c.ric_rad[i] / b;
    if (m >= 2) {
      c.ric_sph[i] = -es * F_s;
      c.scalar[i] += (m - 1) * c.ric_sph[i] / a;
      c.k12[i] = -es * la_ss[i] / b;
      c.k22[i] = -2.0 * es * la_s[i] / a;
    }
    c.k11[i] = -es * lb_ss[i] / b;
  }
  c.scalar_origin = origin_value(metric.grid, c.scalar);
  if (metric.flat) {
    c.bisectional_min = 0.0;
  } else if (m == 1) {
    c.bisectional_min = *std::min_element(c.scalar.begin(), c.scalar.end());
  } else {
    c.bisectional_min = std::min({*std::min_element(c.k11.begin(), c.k11.end()),
                                  *std::min_element(c.k12.begin(), c.k12.end()),
                                  *std::min_element(c.k22.begin(), c.k22.end())});
  }
  return c;
}

double bisectional_min(const RadialKahlerMetric& metric) {
  if (metric.m > 2) throw InputError("bisectional_min: radial formulas implemented for m <= 2 only");
  return curvature(metric).bisectional_min;
}

DistanceField distance_from_origin(const RadialKahlerMetric& metric) {
  const auto& grid = metric.grid;
  const int n = grid.n;
  DistanceField df;
  df.center.assign(metric.m, 0.0);
  df.grid = grid;
  std::vector<double> integrand(n);
  for (int i = 0; i < n; ++i) integrand[i] = std::sqrt(metric.b(i)) * 0.5 * std::sqrt(grid.rho(i));
  const auto cum = cumulative_integral(grid, integrand);
  const double r0 = std::sqrt(grid.rho(0));
  // Near the origin sqrt(b) ~ sqrt(b(0)) (1 + beta rho / 2), integrated over [0, r0].
  const double lb_origin = origin_value(grid, metric.rem_b);
  const double d0 = r0 * std::exp(0.5 * lb_origin) * (1.0 + (metric.log_b(0) - lb_origin) / 6.0);
  const auto lb_s = log_derivatives(metric).lb_s;
  df.d.resize(n);
  df.hess_sph.resize(n);
  df.hess_rad.resize(n);
  for (int i = 0; i < n; ++i) {
    const double r = std::sqrt(grid.rho(i));
    const double sb = std::sqrt(metric.b(i));
    const double d = d0 + cum[i];
    df.d[i] = d;
    df.hess_sph[i] = d * sb / r;
    df.hess_rad[i] = 0.5 * d * sb / r + 0.5 * metric.b(i) + 0.5 * d * sb * lb_s[i] / r;
  }
  return df;
}

double hessian_comparison_check(const RadialKahlerMetric& metric, const Point& y,
                                const std::vector<Point>& samples) {
  if (static_cast<int>(y.size()) != metric.m) throw InputError("hessian_comparison_check: y has wrong dimension");
  const double rho_min = metric.grid.rho(0), rho_max = metric.grid.rho(metric.grid.n - 1);
  if (metric.flat) {
    for (const auto& x : samples) {
      if (rho_of(x, y) < rho_min) throw InputError("hessian_comparison_check: sample coincides with y");
    }
    // (|x - y|^2)_{a bbar} = delta_{a bbar} = g_{a bbar}
    return 0.0;
  }
  if (rho_of(y, Point(metric.m, 0.0)) != 0.0) {
    throw InputError("hessian_comparison_check: radial metrics support y = origin only");
  }
  if (bisectional_min(metric) < -1e-8) {
    throw InputError("hessian_comparison_check: bisectional curvature is negative");
  }
  const auto df = distance_from_origin(metric);
  const int n = metric.grid.n;
  std::vector<double> gap_rad(n), gap_sph(n);
  for (int i = 0; i < n; ++i) {
    gap_rad[i] = df.hess_rad[i] - metric.b(i);
    gap_sph[i] = df.hess_sph[i] - metric.a(i);
  }
  double worst = -kInf;
  for (const auto& x : samples) {
    const double rho = rho_of(x, y);
    if (rho < rho_min) throw InputError("hessian_comparison_check: sample coincides with y");
    if (rho > rho_max) throw InputError("hessian_comparison_check: sample outside the grid");
    double v = interp_rho(metric.grid, gap_rad, rho);
    if (metric.m >= 2) v = std::max(v, interp_rho(metric.grid, gap_sph, rho));
    worst = std::max(worst, v);
  }
  return worst;
}

namespace {

double d1_4(const std::function<double(const Eigen::VectorXd&)>& f, Eigen::VectorXd x, int i, double h) {
  const double xi = x(i);
  x(i) = xi + 2 * h;
  const double p2 = f(x);
  x(i) = xi + h;
  const double p1 = f(x);
  x(i) = xi - h;
  const double m1 = f(x);
  x(i) = xi - 2 * h;
  const double m2 = f(x);
  return (-p2 + 8 * p1 - 8 * m1 + m2) / (12 * h);
}

double d2_4(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x, int i, int j,
            double h) {
  if (i == j) {
    Eigen::VectorXd y = x;
    auto at = [&](double o) {
      y(i) = x(i) + o;
      return f(y);
    };
    return (-at(2 * h) + 16 * at(h) - 30 * f(x) + 16 * at(-h) - at(-2 * h)) / (12 * h * h);
  }
  auto fi = [&](const Eigen::VectorXd& p) { return d1_4(f, p, i, h); };
  return d1_4(fi, x, j, h);
}

}  // namespace

JacobianIdentity jacobian_identity_check(const SmoothFunction& v, const Eigen::VectorXd& x) {
  if (!v.value) throw InputError("jacobian_identity_check: missing function");
  const int n = static_cast<int>(x.size());
  constexpr double hg = 1e-3, hj = 1e-3, hh = 5e-3;
  auto grad = [&](const Eigen::VectorXd& p) -> Eigen::VectorXd {
    if (v.gradient) return v.gradient(p);
    Eigen::VectorXd g(n);
    for (int i = 0; i < n; ++i) g(i) = d1_4(v.value, p, i, hg);
    return g;
  };
  auto phi = [&](const Eigen::VectorXd& p) -> Eigen::VectorXd { return p + grad(p); };

  Eigen::MatrixXd J(n, n);
  for (int j = 0; j < n; ++j) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e(j) = hj;
    J.col(j) = (-phi(x + 2 * e) + 8 * phi(x + e) - 8 * phi(x - e) + phi(x - 2 * e)) / (12 * hj);
  }
  JacobianIdentity r;
  r.lhs = J.determinant();
  if (!(r.lhs > 0.0)) throw InputError("jacobian_identity_check: map is degenerate at x");

  const Eigen::VectorXd y = phi(x);
  auto w = [&](const Eigen::VectorXd& p) { return v.value(p) + 0.5 * (p - y).squaredNorm(); };
  Eigen::MatrixXd H(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) H(i, j) = H(j, i) = d2_4(w, x, i, j, hh);
  r.rhs = std::fabs(H.determinant());
  return r;
}

double soliton_equation_residual(const RadialKahlerMetric& metric, const std::vector<double>& potential,
                             double t, double rho_max_check) {
  const auto& grid = metric.grid;
  if (static_cast<int>(potential.size()) != grid.n) throw InputError("soliton residual: potential length mismatch");
  const auto f_ss = Differentiator(grid).d2(potential);
  const auto lb_ss = log_derivatives(metric).lb_ss;
  const double inv_t = std::isinf(t) ? 0.0 : 1.0 / t;
  double worst = 0.0;
  for (int i = 0; i < grid.n && grid.rho(i) <= rho_max_check; ++i) {
    const double es = std::exp(-grid.s(i));
    const double b = metric.b(i);
    const double res = (es * f_ss[i] + es * lb_ss[i]) / b - inv_t;
    worst = std::max(worst, std::fabs(res));
  }
  return worst;
}

namespace {

double holomorphy_of(const RadialGrid& grid, const std::vector<double>& potential, const RadialKahlerMetric& metric,
               double rho_max_check) {
  // V^z = v z with v = f_s / (rho b); the antiholomorphic derivative has size |v_s|.
  const Differentiator D(grid);
  const auto f_s = D.d1(potential);
  std::vector<double> v(grid.n);
  for (int i = 0; i < grid.n; ++i) v[i] = f_s[i] / (grid.rho(i) * metric.b(i));
  const auto v_s = D.d1(v);
  double worst = 0.0;
  for (int i = 0; i < grid.n && grid.rho(i) <= rho_max_check; ++i) worst = std::max(worst, std::fabs(v_s[i]));
  return worst;
}

}  // namespace

std::pair<RadialKahlerMetric, SolitonSpec> expanding_soliton_construct(int m, double t0, double shape,
                                                                      const RadialGrid& grid) {
  if (m != 1) throw InputError("expanding_soliton_construct: only m = 1 is supported");
  if (!(t0 > 0.0) || !std::isfinite(t0)) throw InputError("expanding_soliton_construct: t0 must be positive");
  if (!(shape > -1.0) || !std::isfinite(shape)) throw InputError("expanding_soliton_construct: shape must exceed -1");

  const double c = (1.0 + shape) / t0;
  SolitonSpec spec;
  spec.kind = SolitonKind::Expanding;
  spec.t0 = t0;
  spec.shape = shape;
  spec.vscale = c;
  spec.cone_angle = 1.0 / (1.0 + shape);
  spec.potential.resize(grid.n);

  if (shape == 0.0) {
    auto metric = metric_flat(1, grid);
    metric.tag = "gaussian-soliton";
    for (int i = 0; i < grid.n; ++i) spec.potential[i] = grid.rho(i) / t0;
    return {metric, spec};  // f_{z zbar} = 1/t0 = R + g/t0 with R = 0, g = 1
  }

  // State (log a, log b) in s = log rho:
  //   (log a)_s = b/a - 1,  (log b)_s = rho (a/t0 - c b)
  using State = std::array<double, 2>;
  auto rhs = [c, t0](const State& x, State& dx, double s) {
    const double rho = std::exp(s);
    dx[0] = std::expm1(x[1] - x[0]);
    dx[1] = rho * (std::exp(x[0]) / t0 - c * std::exp(x[1]));
  };
  const double b1 = 1.0 / t0 - c;
  const double a1 = 0.5 * b1;
  const double beta2 = 0.5 * (a1 / t0 - c * b1);
  const double alpha2 = (beta2 + b1 * b1 / 8.0) / 3.0;
  const double rho_start = grid.rho(0) * 1e-3;
  State x{a1 * rho_start + alpha2 * rho_start * rho_start, b1 * rho_start + beta2 * rho_start * rho_start};

  std::vector<double> times;
  times.reserve(grid.n + 1);
  times.push_back(std::log(rho_start));
  for (int i = 0; i < grid.n; ++i) times.push_back(grid.s(i));

  RadialKahlerMetric metric;
  metric.m = 1;
  metric.grid = grid;
  metric.rem_a.resize(grid.n);
  metric.rem_b.resize(grid.n);
  int k = -1;
  namespace ode = boost::numeric::odeint;
  auto stepper = ode::make_controlled(1e-24, 1e-13, ode::runge_kutta_dopri5<State>());
  try {
    ode::integrate_times(stepper, rhs, x, times.begin(), times.end(), 1e-3, [&](const State& st, double) {
      if (k >= 0) {
        metric.rem_a[k] = st[0];
        metric.rem_b[k] = st[1];
      }
      ++k;
    });
  } catch (const std::exception& e) {
    throw NumericalError(std::string("expanding_soliton_construct: integration failed: ") + e.what());
  }
  if (k != grid.n) throw NumericalError("expanding_soliton_construct: integration stopped early");
  metric.tag = "expanding-soliton";
  metric.validate();

  for (int i = 0; i < grid.n; ++i) spec.potential[i] = c * grid.rho(i) * metric.a(i);
  const double check_max = grid.rho(grid.n - 1);
  spec.soliton_residual = soliton_equation_residual(metric, spec.potential, t0, check_max);
  spec.holomorphy_residual = holomorphy_of(grid, spec.potential, metric, check_max);
  return {metric, spec};
}

SolitonSpec steady_cigar_soliton(const RadialKahlerMetric& cigar) {
  if (cigar.tag != "cigar") throw InputError("steady_cigar_soliton: expects the cigar metric");
  SolitonSpec spec;
  spec.kind = SolitonKind::Steady;
  spec.t0 = kInf;
  spec.vscale = 1.0;
  spec.potential.resize(cigar.grid.n);
  for (int i = 0; i < cigar.grid.n; ++i) spec.potential[i] = std::log1p(cigar.grid.rho(i));
  const double check_max = cigar.grid.rho(cigar.grid.n - 1);
  spec.soliton_residual = soliton_equation_residual(cigar, spec.potential, kInf, check_max);
  spec.holomorphy_residual = holomorphy_of(cigar.grid, spec.potential, cigar, check_max);
  return spec;
}

}  // namespace klab
