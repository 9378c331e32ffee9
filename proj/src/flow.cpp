#include "klab/flow.hpp"

#include <fftw3.h>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>

#include "klab/errors.hpp"
#include "klab/kernels.hpp"

namespace klab {

namespace {

// Internal signal: the attempted step must be retried with a smaller dt.
struct StepRejected {
  std::string why;
};

// Affine radial operator  u -> D u_ss + C u_s + S u + F  on the grid with ghost
// nodes closing the stencils at both ends.
struct RadialOp {
  const RadialGrid* grid = nullptr;
  std::vector<double> D, C, S, F;
  OuterCondition outer;
};

// Ghost node values u_{-k}, u_{n-1+k} for k = 1, 2.
// Inner ghosts continue u = alpha + beta rho through u_0, u_1 (regularity at the
// origin); outer ghosts are odd reflections carrying the held slope.
double ghost_lo_weight(const RadialOp& A, int k) {
  const double h = A.grid->h;
  return -(1.0 - std::exp(-k * h)) / std::expm1(h);
}
double ghost_lo(const RadialOp& A, const std::vector<double>& u, int k) {
  return u[0] + ghost_lo_weight(A, k) * (u[1] - u[0]);
}
double ghost_hi(const RadialOp& A, const std::vector<double>& u, int k) {
  const int n = static_cast<int>(u.size());
  const double slope = A.outer.robin ? A.outer.value * u[n - 1] : A.outer.value;
  return u[n - 1 - k] + 2.0 * k * A.grid->h * slope;
}

// Linear part of the three-point operator with the ghosts folded in.
struct Tridiag {
  std::vector<double> lo, di, up;
};

Tridiag tridiag_of(const RadialOp& A) {
  const int n = A.grid->n;
  const double h = A.grid->h, ih2 = 1.0 / (h * h), i2h = 0.5 / h;
  Tridiag T{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
  for (int i = 0; i < n; ++i) {
    T.lo[i] = A.D[i] * ih2 - A.C[i] * i2h;
    T.di[i] = -2.0 * A.D[i] * ih2 + A.S[i];
    T.up[i] = A.D[i] * ih2 + A.C[i] * i2h;
  }
  const double w = ghost_lo_weight(A, 1);
  T.di[0] += T.lo[0] * (1.0 - w);
  T.up[0] += T.lo[0] * w;
  T.lo[0] = 0.0;
  if (A.outer.robin) T.di[n - 1] += T.up[n - 1] * 2.0 * h * A.outer.value;
  T.lo[n - 1] += T.up[n - 1];
  T.up[n - 1] = 0.0;
  return T;
}

template <class Row>
std::vector<double> five_point(const RadialOp& A, const std::vector<double>& u, Row row) {
  const int n = static_cast<int>(u.size());
  auto at = [&](int j) {
    if (j < 0) return ghost_lo(A, u, -j);
    if (j >= n) return ghost_hi(A, u, j - n + 1);
    return u[j];
  };
  std::vector<double> y(n);
  for (int i = 0; i < n; ++i) y[i] = row(i, at(i - 2), at(i - 1), u[i], at(i + 1), at(i + 2));
  return y;
}

// Three-point operator, formed from neighbour differences: near the origin
// D/h^2 ~ 1e10 and the plain row product would lose constants to rounding.
std::vector<double> apply2(const RadialOp& A, const std::vector<double>& u) {
  const double h = A.grid->h;
  return five_point(A, u, [&](int i, double, double um1, double u0, double up1, double) {
    const double uss = ((um1 - u0) + (up1 - u0)) / (h * h);
    const double us = (up1 - um1) / (2.0 * h);
    return A.D[i] * uss + A.C[i] * us + A.S[i] * u0 + A.F[i];
  });
}

// Five-point (fourth-order) minus three-point operator, taken from the
// difference stencils directly so no large terms cancel.
std::vector<double> defect4(const RadialOp& A, const std::vector<double>& u) {
  const double h = A.grid->h;
  return five_point(A, u, [&](int i, double um2, double um1, double u0, double up1, double up2) {
    const double d4 = -(um2 - 4.0 * um1 + 6.0 * u0 - 4.0 * up1 + up2) / (12.0 * h * h);
    const double d3 = (um2 - 2.0 * um1 + 2.0 * up1 - up2) / (12.0 * h);
    return A.D[i] * d4 + A.C[i] * d3;
  });
}

// x <- (I - w T_lin)^{-1} rhs, where T_lin is the linear part of T.
std::vector<double> tridiag_solve(const Tridiag& T, const std::vector<double>& rhs, double w) {
  const int n = static_cast<int>(rhs.size());
  std::vector<double> cp(n), dp(n);
  const double b0 = 1.0 - w * T.di[0];
  cp[0] = -w * T.up[0] / b0;
  dp[0] = rhs[0] / b0;
  for (int i = 1; i < n; ++i) {
    const double a = -w * T.lo[i];
    const double b = 1.0 - w * T.di[i] - a * cp[i - 1];
    if (!(std::fabs(b) > 0.0)) throw StepRejected{"singular tridiagonal pivot"};
    cp[i] = -w * T.up[i] / b;
    dp[i] = (rhs[i] - a * dp[i - 1]) / b;
  }
  std::vector<double> x(n);
  x[n - 1] = dp[n - 1];
  for (int i = n - 2; i >= 0; --i) x[i] = dp[i] - cp[i] * x[i + 1];
  return x;
}

void check_cfl(const SchemeParams& p, const RadialGrid& grid, const std::vector<double>& D, double dt) {
  if (p.theta >= 0.5) return;
  const double dmax = *std::max_element(D.begin(), D.end());
  const double limit = p.cfl_safety * grid.h * grid.h / (2.0 * (1.0 - 2.0 * p.theta) * dmax);
  if (dt > limit) {
    throw InputError("CFL violation: dt = " + std::to_string(dt) + " exceeds " + std::to_string(limit) +
                     " for theta = " + std::to_string(p.theta));
  }
}

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

OuterCondition outer_slope(const RadialGrid& grid, const std::vector<double>& f, bool robin) {
  const Differentiator D(grid);
  const double d = D.d1(f)[grid.n - 1];
  const double v = f[grid.n - 1];
  if (robin && v != 0.0) return {d / v, true};
  return {d, false};
}

// One theta step of u_t = A(t, u) u.  `op_at(x)` builds the operator at the new
// time level around the iterate x. The implicit stage solves with the
// three-point operator and carries the five-point defect explicitly;
// iterating to a fixed point gives the fourth-order spatial scheme and also
// closes the nonlinearity.
constexpr double kStallLevel = 1e-9;

template <class OpAt>
std::vector<double> theta_step(const std::vector<double>& u, const RadialOp& A0, OpAt op_at, double dt,
                               const SchemeParams& p) {
  check_cfl(p, *A0.grid, A0.D, dt);
  const double w0 = (1.0 - p.theta) * dt, w1 = p.theta * dt;
  std::vector<double> rhs = u;
  if (w0 > 0.0) {
    kernels::axpy(w0, apply2(A0, u), rhs);
    kernels::axpy(w0, defect4(A0, u), rhs);
  }

  if (w1 == 0.0) return rhs;
  // Defect correction in increment form: x += (I - w1 L2)^{-1} (rhs + w1 A4(x) - x).
  std::vector<double> x = u;
  double last_change = HUGE_VAL;
  for (int k = 0; k < p.picard_max; ++k) {
    const RadialOp A1 = op_at(x);
    const Tridiag T1 = tridiag_of(A1);
    const auto a2 = apply2(A1, x);
    const auto d = defect4(A1, x);
    std::vector<double> res(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) res[i] = rhs[i] + w1 * (a2[i] + d[i]) - x[i];
    const auto dx = tridiag_solve(T1, res, w1);
    double change = 0.0, scale = 1.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] += dx[i];
      change = std::max(change, std::fabs(dx[i]));
      scale = std::max(scale, std::fabs(x[i]));
    }
    if (!all_finite(x)) throw StepRejected{"non-finite radial field"};
    if (change <= p.picard_tol * scale) return x;
    // Stalled at the rounding floor of the stiff rows near the origin.
    if (change <= kStallLevel * scale && change >= 0.5 * last_change) return x;
    last_change = change;
  }
  throw StepRejected{"fixed-point iteration did not converge"};
}

// --- metric ---------------------------------------------------------------

// Smooth radial data is a power series in rho at the origin. The innermost
// samples are blended into their least-squares quartic in rho (weight 1 below
// rho_c, cosine taper to 0 at 10 rho_c); this removes rounding noise that
// e^{-s} d_ss would otherwise amplify into the curvature.
void regularize_origin(const RadialGrid& grid, std::vector<double>& v, double rho_c = 1e-3) {
  const double rho_hi = 10.0 * rho_c;
  int k = 0;
  while (k < grid.n && grid.rho(k) <= rho_hi) ++k;
  if (k < 16) return;
  Eigen::MatrixXd V(k, 5);
  Eigen::VectorXd y(k);
  for (int i = 0; i < k; ++i) {
    const double x = grid.rho(i) / rho_hi;
    V.row(i) << 1.0, x, x * x, x * x * x, x * x * x * x;
    y(i) = v[i];
  }
  const Eigen::VectorXd fit = V * V.colPivHouseholderQr().solve(y);
  const double span = std::log(rho_hi / rho_c);
  for (int i = 0; i < k; ++i) {
    const double u = std::clamp((grid.s(i) - std::log(rho_c)) / span, 0.0, 1.0);
    const double w = 0.5 * (1.0 + std::cos(M_PI * u));
    v[i] = w * fit(i) + (1.0 - w) * v[i];
  }
}

// rem_t = kappa e^{-s-L} (rem_ss + kappa_b trend_ss),  L = kappa_b trend + rem
RadialKahlerMetric metric_step(const RadialKahlerMetric& g, MetricFlow flow, const OuterCondition& slopes,
                               double dt, const SchemeParams& p) {
  if (flow == MetricFlow::Static || g.flat) return g;
  if (g.m != 1) throw InputError("metric flow: only m = 1 radial metrics evolve (flat metrics are stationary)");
  const double kappa = flow == MetricFlow::Kahler ? 1.0 : 2.0;
  const auto& grid = g.grid;
  const int n = grid.n;

  auto op_for = [&](const std::vector<double>& rem) {
    RadialOp A{&grid, std::vector<double>(n), std::vector<double>(n, 0.0), std::vector<double>(n, 0.0),
               std::vector<double>(n), slopes};
    for (int i = 0; i < n; ++i) {
      const double rho = grid.rho(i);
      const double L = g.kappa_b * trend(rho) + rem[i];
      A.D[i] = kappa * std::exp(-grid.s(i) - L);
      A.F[i] = A.D[i] * g.kappa_b * trend_ss(rho);
    }
    return A;
  };

  RadialKahlerMetric out = g;
  out.rem_b = theta_step(g.rem_b, op_for(g.rem_b), op_for, dt, p);
  regularize_origin(grid, out.rem_b);
  // Spherical eigenvalue a = (1/rho) int_0^rho b, kept consistent with b.
  std::vector<double> integrand(n);
  for (int i = 0; i < n; ++i) integrand[i] = out.b(i) * grid.rho(i);
  const auto cum = cumulative_integral(grid, integrand);
  const double G0 = grid.rho(0) * 0.5 * (out.b_origin() + out.b(0));
  for (int i = 0; i < n; ++i) {
    out.rem_a[i] = std::log((G0 + cum[i]) / grid.rho(i)) - out.kappa_a * trend(grid.rho(i));
  }
  return out;
}

// --- radial scalar fields ---------------------------------------------------

// Delta + S for the metric g:  D = e^{-s}/b,  C = (m-1) e^{-s}/a.
RadialOp laplace_op(const RadialKahlerMetric& g, const std::vector<double>* S, const OuterCondition& slopes) {
  const int n = g.grid.n;
  RadialOp A{&g.grid, std::vector<double>(n), std::vector<double>(n), S ? *S : std::vector<double>(n, 0.0),
             std::vector<double>(n, 0.0), slopes};
  for (int i = 0; i < n; ++i) {
    const double es = std::exp(-g.grid.s(i));
    A.D[i] = es / g.b(i);
    A.C[i] = (g.m - 1) * es / g.a(i);
  }
  return A;
}

std::vector<double> scalar_step(const std::vector<double>& u, const RadialKahlerMetric& g0,
                                const RadialKahlerMetric& g1, const std::vector<double>* S0,
                                const std::vector<double>* S1, const OuterCondition& slopes, double dt,
                                const SchemeParams& p) {
  const RadialOp A1 = laplace_op(g1, S1, slopes);
  return theta_step(u, laplace_op(g0, S0, slopes), [&](const std::vector<double>&) { return A1; }, dt, p);
}

TensorProfile tensor_step(const TensorProfile& h, const RadialKahlerMetric& g0, const RadialKahlerMetric& g1,
                          const OuterCondition& slopes, double dt, const SchemeParams& p) {
  if (g0.m >= 2) {
    if (!g0.flat || !g1.flat) throw InputError("lichnerowicz: m >= 2 supported on flat metrics only");
    const double c = h.rad.empty() ? 0.0 : h.rad[0];
    for (std::size_t i = 0; i < h.rad.size(); ++i) {
      if (h.rad[i] != c || h.sph[i] != c) {
        throw InputError("lichnerowicz: m >= 2 supported for constant tensors c*g only");
      }
    }
    return h;  // constant tensor on flat space: all terms vanish
  }
  // m = 1, h_{z zbar} = H g:  H_t = Delta H + R H
  const auto R0 = curvature(g0).scalar;
  const auto R1 = curvature(g1).scalar;
  TensorProfile out = h;
  out.rad = scalar_step(h.rad, g0, g1, &R0, &R1, slopes, dt, p);
  if (out.positive) {
    double scale = 0.0;
    for (double v : out.rad) scale = std::max(scale, std::fabs(v));
    if (out.min_eigenvalue(1) < -1e-10 * std::max(1.0, scale)) throw StepRejected{"tensor positivity lost"};
  }
  return out;
}

// --- torus bundle ---------------------------------------------------------

TorusBundle bundle_step(const TorusBundle& B, double dt, const SchemeParams& p) {
  const int n = B.n;
  const int nc = n / 2 + 1;
  const double h = B.spacing();
  std::vector<double> f(n * n);
  for (int k = 0; k < n * n; ++k) f[k] = -B.omega0[k] + B.rank * B.lambda;

  std::vector<double> in(n * n);
  std::vector<std::complex<double>> uh(n * nc), fh(n * nc);
  auto forward = [&](const std::vector<double>& src, std::vector<std::complex<double>>& dst) {
    in = src;
    fftw_plan plan = fftw_plan_dft_r2c_2d(n, n, in.data(), reinterpret_cast<fftw_complex*>(dst.data()),
                                          FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);
  };
  forward(B.u, uh);
  forward(f, fh);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < nc; ++i) {
      // Symbol of (1/4)(five-point Laplacian).
      const double sx = std::sin(M_PI * i / n), sy = std::sin(M_PI * j / n);
      const double mu = -(sx * sx + sy * sy) / (h * h);
      const int k = j * nc + i;
      uh[k] = ((1.0 + (1.0 - p.theta) * dt * mu) * uh[k] + dt * fh[k]) / (1.0 - p.theta * dt * mu);
    }
  }
  std::vector<double> out(n * n);
  fftw_plan plan = fftw_plan_dft_c2r_2d(n, n, reinterpret_cast<fftw_complex*>(uh.data()), out.data(),
                                        FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);
  const double norm = 1.0 / (double(n) * n);
  for (auto& v : out) v *= norm;
  if (!all_finite(out)) throw StepRejected{"non-finite bundle potential"};
  TorusBundle next = B;
  next.u = std::move(out);
  return next;
}

// --- one attempted step ------------------------------------------------------

FlowState single_step(const FlowState& s, const HeldSlopes& e, double dt) {
  FlowState next = s;
  next.metric = metric_step(s.metric, s.metric_flow, e.metric, dt, s.scheme);
  // Real time: Delta_G = 2 Delta and R_G = 2R, so the fields see twice the step.
  const double dtf = s.metric_flow == MetricFlow::Real ? 2.0 * dt : dt;
  if (s.scalar) {
    next.scalar = scalar_step(*s.scalar, s.metric, next.metric, nullptr, nullptr, e.scalar, dtf, s.scheme);
  }
  if (s.tensor) next.tensor = tensor_step(*s.tensor, s.metric, next.metric, e.tensor, dtf, s.scheme);
  if (s.bundle) next.bundle = bundle_step(*s.bundle, dt, s.scheme);
  next.t = s.t + dt;
  return next;
}

HeldSlopes initial_edges(const FlowState& s) {
  HeldSlopes e;
  const auto& grid = s.metric.grid;
  if (s.metric_flow != MetricFlow::Static && !s.metric.flat) e.metric = outer_slope(grid, s.metric.rem_b, false);
  if (s.scalar) e.scalar = outer_slope(grid, *s.scalar, false);
  if (s.tensor && s.metric.m == 1) e.tensor = outer_slope(grid, s.tensor->rad, true);
  return e;
}

}  // namespace

const char* to_string(MetricFlow f) {
  switch (f) {
    case MetricFlow::Static: return "static";
    case MetricFlow::Kahler: return "kahler";
    case MetricFlow::Real: return "real";
  }
  return "unknown";
}

std::vector<double> TensorProfile::trace(int m) const {
  std::vector<double> H = rad;
  if (m >= 2)
    for (std::size_t i = 0; i < H.size(); ++i) H[i] += (m - 1) * sph[i];
  return H;
}

double TensorProfile::min_eigenvalue(int m) const {
  double v = *std::min_element(rad.begin(), rad.end());
  if (m >= 2) v = std::min(v, *std::min_element(sph.begin(), sph.end()));
  return v;
}

double TorusBundle::spacing() const { return 2.0 * M_PI / n; }

std::vector<double> TorusBundle::laplacian(const std::vector<double>& f) const {
  const double h = spacing();
  const double w = 0.25 / (h * h);
  std::vector<double> out(n * n);
  for (int j = 0; j < n; ++j) {
    const int jp = (j + 1) % n, jm = (j + n - 1) % n;
    for (int i = 0; i < n; ++i) {
      const int ip = (i + 1) % n, im = (i + n - 1) % n;
      out[j * n + i] =
          w * (f[j * n + ip] + f[j * n + im] + f[jp * n + i] + f[jm * n + i] - 4.0 * f[j * n + i]);
    }
  }
  return out;
}

std::vector<double> TorusBundle::omega() const {
  auto lap = laplacian(u);
  for (int k = 0; k < n * n; ++k) lap[k] = omega0[k] - lap[k];
  return lap;
}

TorusBundle make_torus_bundle(int n, const std::vector<double>& omega0, double lambda) {
  if (n < 8 || static_cast<int>(omega0.size()) != n * n) throw InputError("torus bundle: bad grid");
  double mean = 0.0;
  for (double v : omega0) mean += v;
  mean /= double(n) * n;
  if (std::fabs(mean - lambda) > 1e-12 * std::max(1.0, std::fabs(mean))) {
    throw InputError("hermitian-einstein: lambda must equal the mean of Omega(., 0)");
  }
  TorusBundle B;
  B.n = n;
  B.u.assign(n * n, 0.0);
  B.omega0 = omega0;
  B.lambda = lambda;
  return B;
}

FlowState advance(const FlowState& state, double dt) {
  if (!(dt > 0.0)) throw InputError("advance: dt must be positive");
  const auto& p = state.scheme;
  if (p.theta < 0.0 || p.theta > 1.0) throw InputError("theta must lie in [0, 1]");
  FlowState cur = state;
  if (!cur.slopes) cur.slopes = initial_edges(cur);
  double remaining = dt, h = dt;
  while (remaining > 1e-15 * dt) {
    h = std::min(h, remaining);
    try {
      cur = single_step(cur, *cur.slopes, h);
      remaining -= h;
    } catch (const StepRejected& r) {
      h *= 0.5;
      if (h < p.dt_min) {
        throw NumericalError("step size underflow at t = " + std::to_string(cur.t) + " (dt = " +
                             std::to_string(h) + "): " + r.why);
      }
    }
  }
  cur.t = state.t + dt;
  return cur;
}

namespace {

FlowState step_as(const FlowState& s, std::optional<MetricFlow> flow) {
  FlowState copy = s;
  if (flow) copy.metric_flow = *flow;
  return advance(copy, s.scheme.dt);
}

}  // namespace

FlowState kahler_ricci_step(const FlowState& s) { return step_as(s, MetricFlow::Kahler); }
FlowState ricci_flow_step_real_2d(const FlowState& s) { return step_as(s, MetricFlow::Real); }

FlowState heat_step(const FlowState& s) {
  if (!s.scalar) throw InputError("heat_step: state has no scalar field");
  return step_as(s, std::nullopt);
}

FlowState lichnerowicz_step(const FlowState& s) {
  if (!s.tensor) throw InputError("lichnerowicz_step: state has no tensor field");
  return step_as(s, std::nullopt);
}

FlowState hermitian_einstein_step(const FlowState& s) {
  if (!s.bundle) throw InputError("hermitian_einstein_step: state has no bundle potential");
  return step_as(s, std::nullopt);
}

std::vector<double> radial_laplacian(const RadialKahlerMetric& g, const std::vector<double>& u) {
  const Differentiator D(g.grid);
  const auto us = D.d1(u), uss = D.d2(u);
  std::vector<double> out(u.size());
  for (int i = 0; i < g.grid.n; ++i) {
    const double es = std::exp(-g.grid.s(i));
    out[i] = es * (uss[i] / g.b(i) + (g.m - 1) * us[i] / g.a(i));
  }
  return out;
}

double heat_kernel(double rho, double t) { return std::exp(-rho / t) / (M_PI * t); }

std::vector<double> Trajectory::times() const {
  std::vector<double> t;
  for (const auto& s : states) t.push_back(s.t);
  return t;
}

std::size_t Trajectory::index_of(double t) const {
  for (std::size_t k = 0; k < states.size(); ++k)
    if (std::fabs(states[k].t - t) <= 1e-12 * std::max(1.0, std::fabs(t))) return k;
  throw InputError("trajectory has no snapshot at t = " + std::to_string(t));
}

FlowState flow_fixture(const FlowRunConfig& c) {
  const auto grid = RadialGrid::log_uniform(1e-6, c.rho_max, c.grid_n);
  FlowState s;
  s.t = c.t_start;
  s.scheme = c.scheme;
  const std::string& tag = c.initial;
  auto profile = [&](auto fn) {
    std::vector<double> v(grid.n);
    for (int i = 0; i < grid.n; ++i) v[i] = fn(grid.rho(i), grid.s(i));
    return v;
  };
  if (tag == "flat") {
    s.metric = metric_flat(c.m, grid);
    s.metric_flow = MetricFlow::Kahler;
  } else if (tag == "flat-perturbed") {
    s.metric = metric_flat(1, grid);
    s.metric.flat = false;
    s.metric.tag = "flat-perturbed";
    s.metric.rem_b = profile([](double, double sv) { return 0.2 * std::exp(-0.5 * sv * sv); });
    s.metric_flow = MetricFlow::Kahler;
  } else if (tag == "cigar" || tag == "cigar-ric" || tag == "cigar-bump") {
    s.metric = metric_cigar(grid);
    s.metric_flow = MetricFlow::Kahler;
    if (tag == "cigar-ric") {
      TensorProfile h;
      h.rad = curvature(s.metric).scalar;
      h.positive = true;
      s.tensor = h;
    } else if (tag == "cigar-bump") {
      TensorProfile h;
      h.rad = profile([](double r, double) { return r < 4.0 ? std::exp(-1.0 / (1.0 - (r - 2.0) * (r - 2.0) / 4.0)) : 0.0; });
      for (auto& v : h.rad) v = std::isfinite(v) ? v : 0.0;
      h.positive = true;
      s.tensor = h;
    }
  } else if (tag == "heat-kernel" || tag == "flat-rho" || tag == "flat-log" || tag == "flat-const") {
    const int m = tag == "heat-kernel" || tag == "flat-log" ? 1 : c.m;
    s.metric = metric_flat(m, grid);
    s.metric_flow = MetricFlow::Static;
    if (tag == "heat-kernel") {
      if (!(c.t_start > 0.0)) throw InputError("heat-kernel fixture needs t_start > 0");
      s.scalar = profile([&](double r, double) { return heat_kernel(r, c.t_start); });
    } else if (tag == "flat-rho") {
      s.scalar = profile([](double r, double) { return r; });
    } else if (tag == "flat-log") {
      s.scalar = profile([](double r, double) { return std::log1p(r); });
    } else {
      s.scalar = std::vector<double>(grid.n, 3.0);
    }
  } else if (tag == "torus-he" || tag == "torus-const") {
    s.metric = metric_flat(1, RadialGrid::log_uniform(1e-6, 1e4, 16));
    s.metric_flow = MetricFlow::Static;
    const int n = c.torus_n;
    std::vector<double> om(n * n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) om[j * n + i] = tag == "torus-he" ? 1.0 + 0.5 * std::cos(2.0 * M_PI * i / n) : 1.0;
    double mean = 0.0;
    for (double v : om) mean += v;
    s.bundle = make_torus_bundle(n, om, mean / (double(n) * n));
  } else if (tag == "expanding-soliton") {
    if (!(c.t_start > 0.0)) throw InputError("expanding-soliton fixture needs t_start > 0");
    s.metric = expanding_soliton_construct(1, c.t_start, 0.5, grid).first;
    s.metric_flow = MetricFlow::Kahler;
  } else {
    throw InputError("unknown flow fixture '" + tag + "'");
  }
  if (c.real_normalization && s.metric_flow == MetricFlow::Kahler) s.metric_flow = MetricFlow::Real;
  return s;
}

Trajectory analytic_trajectory(const std::string& tag, const std::vector<double>& times, int m, int grid_n) {
  if (times.empty()) throw InputError("analytic_trajectory: no times");
  for (std::size_t k = 1; k < times.size(); ++k)
    if (!(times[k] > times[k - 1])) throw InputError("analytic_trajectory: times must increase");
  const auto grid = RadialGrid::standard(grid_n);
  Trajectory traj;
  traj.tag = tag;
  for (double t : times) {
    FlowState s;
    s.t = t;
    if (tag.starts_with("cigar-exact")) {
      const bool real = tag == "cigar-exact-real" || tag == "cigar-exact-real-ric";
      const bool ric = tag.ends_with("-ric");
      if (!real && !ric && tag != "cigar-exact") throw InputError("unknown analytic trajectory '" + tag + "'");
      const double tk = real ? 2.0 * t : t;
      s.metric = metric_cigar(grid);
      s.metric.tag = tag;
      const double et = std::exp(tk);
      // log b = -log(e^t + rho) = -log1p(rho) - log((e^t + rho)/(1 + rho))
      for (int i = 0; i < grid.n; ++i) s.metric.rem_b[i] = -std::log1p(std::expm1(tk) / (1.0 + grid.rho(i)));
      // a = (1/rho) log(1 + rho e^{-t})
      for (int i = 0; i < grid.n; ++i) {
        const double r = grid.rho(i);
        s.metric.rem_a[i] = std::log(std::log1p(r / et) / r) + std::log1p(r);
      }
      s.metric_flow = real ? MetricFlow::Real : MetricFlow::Kahler;
      if (ric) {
        // Gaussian curvature e^t/(e^t + rho)
        TensorProfile h;
        h.rad.resize(grid.n);
        for (int i = 0; i < grid.n; ++i) h.rad[i] = 1.0 / (1.0 + grid.rho(i) / et);
        h.positive = true;
        s.tensor = h;
      }
    } else if (tag == "heat-kernel-tensor") {
      if (!(t > 0.0)) throw InputError("heat-kernel-tensor needs t > 0");
      s.metric = metric_flat(1, grid);
      TensorProfile h;
      h.rad.resize(grid.n);
      for (int i = 0; i < grid.n; ++i) h.rad[i] = heat_kernel(grid.rho(i), t);
      h.positive = true;
      s.tensor = h;
    } else if (tag == "flat-g") {
      s.metric = metric_flat(m, grid);
      TensorProfile h;
      h.rad.assign(grid.n, 1.0);
      if (m >= 2) h.sph.assign(grid.n, 1.0);
      h.positive = true;
      s.tensor = h;
    } else {
      throw InputError("unknown analytic trajectory '" + tag + "'");
    }
    traj.states.push_back(std::move(s));
  }
  return traj;
}

Trajectory run_flow(const FlowRunConfig& c) {
  if (!(c.t_end > 0.0) || !(c.t_end > c.t_start)) throw InputError("run_flow: need T_end > max(0, t_start)");
  if (!(c.stride > 0.0)) throw InputError("run_flow: stride must be positive");
  if (!(c.scheme.dt > 0.0)) throw InputError("run_flow: dt must be positive");
  Trajectory traj;
  traj.tag = c.initial;
  FlowState s = flow_fixture(c);
  traj.states.push_back(s);

  const int outputs = static_cast<int>(std::floor((c.t_end - c.t_start) / c.stride + 1e-9));
  try {
    for (int k = 1; k <= outputs + 1; ++k) {
      const double target = k <= outputs ? c.t_start + k * c.stride : c.t_end;
      if (target <= s.t + 1e-12) break;
      const double span = target - s.t;
      const int steps = std::max(1, static_cast<int>(std::ceil(span / c.scheme.dt - 1e-9)));
      for (int q = 0; q < steps; ++q) s = advance(s, span / steps);
      s.t = target;
      traj.states.push_back(s);
    }
  } catch (const NumericalError& e) {
    traj.failed = true;
    traj.failure = e.what();
  }
  return traj;
}

double cigar_self_similarity_error(const Trajectory& traj, double rho_interior) {
  if (traj.states.empty()) throw InputError("empty trajectory");
  const auto& first = traj.states.front();
  const auto R0 = curvature(first.metric).scalar;
  const auto& grid = first.metric.grid;
  double worst = 0.0;
  for (const auto& st : traj.states) {
    const double tk = (st.metric_flow == MetricFlow::Real ? 2.0 : 1.0) * (st.t - first.t);
    const auto R = curvature(st.metric).scalar;
    for (int i = 0; i < grid.n && grid.rho(i) <= rho_interior; ++i) {
      const double ref = interp_s(grid, R0, grid.s(i) - tk);
      worst = std::max(worst, std::fabs(R[i] - ref) / std::fabs(ref));
    }
  }
  return worst;
}

double boundary_influence(const FlowRunConfig& c, double rho_interior) {
  FlowRunConfig wide = c;
  const auto grid = RadialGrid::log_uniform(1e-6, c.rho_max, c.grid_n);
  const int extra = static_cast<int>(std::lround(std::log(2.0) / grid.h));
  wide.grid_n = c.grid_n + extra;
  wide.rho_max = std::exp(grid.s0 + grid.h * (wide.grid_n - 1));
  FlowRunConfig last = c;
  const auto a = run_flow(last), b = run_flow(wide);
  if (a.failed || b.failed) throw NumericalError("boundary_influence: a run failed");
  const auto Ra = curvature(a.states.back().metric).scalar;
  const auto Rb = curvature(b.states.back().metric).scalar;
  double worst = 0.0;
  for (int i = 0; i < grid.n && grid.rho(i) <= rho_interior; ++i)
    worst = std::max(worst, std::fabs(Ra[i] - Rb[i]) / std::max(std::fabs(Ra[i]), 1e-300));
  return worst;
}

}  // namespace klab
