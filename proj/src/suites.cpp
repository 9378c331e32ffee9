#include "klab/suites.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>

#include "klab/errors.hpp"
#include "klab/flow.hpp"
#include "klab/geometry.hpp"
#include "klab/harnack.hpp"
#include "klab/hermitian.hpp"
#include "klab/lyh.hpp"
#include "klab/monotonicity.hpp"

namespace klab {

namespace {

std::vector<double> steps(double a, double b, int n) {
  std::vector<double> t;
  for (int k = 0; k <= n; ++k) t.push_back(a + (b - a) * k / n);
  return t;
}

Point at_rho(double rho) { return Point{cplx(std::sqrt(rho), 0.0)}; }

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double e = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) e = std::max(e, std::fabs(a[i] - b[i]));
  return e;
}

Eigen::MatrixXd random_psd(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> nd;
  std::uniform_int_distribution<int> rk(1, n);
  const int k = rk(rng);
  Eigen::MatrixXd B(n, k);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < k; ++j) B(i, j) = nd(rng);
  return B * B.transpose();
}

FlowRunConfig flow_cfg(const std::string& tag, double t_end, double stride, double dt, int grid_n) {
  FlowRunConfig c;
  c.initial = tag;
  c.t_end = t_end;
  c.stride = stride;
  c.scheme.dt = dt;
  c.grid_n = grid_n;
  return c;
}

Trajectory checked_run(const FlowRunConfig& c) {
  auto tr = run_flow(c);
  if (tr.failed) throw NumericalError("flow " + c.initial + " failed: " + tr.failure);
  return tr;
}

Trajectory cigar_flow(bool real) {
  FlowRunConfig c;
  c.initial = "cigar-ric";
  c.t_end = real ? 0.5 : 1.0;
  c.stride = 0.01;
  c.real_normalization = real;
  return checked_run(c);
}

Trajectory torus_flow() {
  FlowRunConfig c;
  c.initial = "torus-he";
  c.t_end = 1.0;
  c.stride = 0.01;
  c.scheme.dt = 1e-3;
  return checked_run(c);
}

// w_t - |w_z|^2 / w + w / t for w = e^{-rho/t} / (pi t), relative to w(0, t).
double kernel_identity(double rho, double t) {
  const double w = heat_kernel(rho, t);
  const double w_t = w * (rho / (t * t) - 1.0 / t);
  const double wz2 = w * w * rho / (t * t);
  return std::fabs(w_t - wz2 / w + w / t) / heat_kernel(0.0, t);
}

// w_t - w_x^2 / w + w / (2t) for the line kernel.
double line_kernel_identity(double x, double t) {
  const double w = std::exp(-x * x / (4 * t)) / std::sqrt(4 * M_PI * t);
  const double wt = w * (x * x / (4 * t * t) - 0.5 / t), wx = -w * x / (2 * t);
  return std::fabs(wt - wx * wx / w + w / (2 * t));
}

Series scan_series(const std::string& name, const ScanReport& rep) {
  std::map<double, double> per_t;
  for (const auto& s : rep.samples) {
    const double v = rep.ancient ? s.ancient_value : s.value;
    auto it = per_t.find(s.t);
    if (it == per_t.end()) per_t[s.t] = v;
    else it->second = std::min(it->second, v);
  }
  Series out{name, {"t", "min"}, {}};
  for (const auto& [t, v] : per_t) out.rows.push_back({t, v});
  return out;
}

}  // namespace

SuiteReport suite_hermitian(const SuiteOptions& o) {
  SuiteReport rep{"hermitian", {}, {}};
  std::mt19937_64 rng(o.seed);
  int violations = 0;
  double worst = -HUGE_VAL;
  for (int trial = 0; trial < o.psd_trials; ++trial) {
    const int m = 1 + trial % 4;
    const Eigen::MatrixXd A = random_psd(rng, 2 * m);
    const auto r = block_det_inequality_check(BlockSymmetricMatrix(A), 1e-9);
    if (!r.holds) ++violations;
    // relative to the Hadamard bound, which dominates both sides
    const double scale = std::max(A.diagonal().prod(), 1e-300);
    worst = std::max(worst, (r.lhs - r.rhs) / scale);
  }
  rep.at_most("block-det-violations", "block determinant lemma", violations, 0.0);
  rep.at_most("block-det-worst-relative-excess", "block determinant lemma", worst, 1e-9);

  int bound_violations = 0;
  double bound_worst = -HUGE_VAL;
  for (int trial = 0; trial < o.quadratic_trials; ++trial) {
    const int m = 1 + trial % 4;
    const Eigen::MatrixXd Q = random_psd(rng, 2 * m);
    const BlockSymmetricMatrix H(0.5 * (Q + Q.transpose()));
    const auto r = hessian_det_bound_check(H, complex_hessian_from_real(H), 1e-9);
    if (!r.holds) ++bound_violations;
    bound_worst = std::max(bound_worst, (r.lhs - r.rhs) / std::max(Q.diagonal().prod(), 1e-300));
  }
  rep.at_most("hessian-bound-violations", "real vs complex Hessian determinant", bound_violations, 0.0);
  rep.at_most("hessian-bound-worst-relative-excess", "real vs complex Hessian determinant", bound_worst, 1e-9);
  return rep;
}

SuiteReport suite_density(const SuiteOptions&) {
  SuiteReport rep{"density", {}, {}};
  const Point o2{0.0, 0.0};
  const auto radii = log_radii(1e-3, 10.0, 9);
  double line_err = 0.0;
  for (auto c : {AlgebraicCurve::line(1.0, 0.0), AlgebraicCurve::line(cplx(1, 2), cplx(-0.5, 3))})
    for (double v : density_theta(c, o2, radii).value) line_err = std::max(line_err, std::fabs(v - 1.0));
  rep.at_most("line-theta-equals-1", "density of a complex line", line_err, 1e-8);

  double node_err = 0.0;
  for (double v : density_theta(AlgebraicCurve::node(), o2, radii).value)
    node_err = std::max(node_err, std::fabs(v - 2.0));
  rep.at_most("node-theta-equals-2", "density of two lines", node_err, 1e-4);

  const auto pr = log_radii(1e-3, 10.0, 41);
  const auto par = density_theta(AlgebraicCurve::parabola(), o2, pr);
  const auto mono = density_monotonicity_check(AlgebraicCurve::parabola(), o2, pr, 1e-6);
  rep.at_least("parabola-min-slope", "density monotonicity", mono.min_slope, 1e-6 + mono.slope_error);
  rep.at_most("parabola-theta-small-r", "Lelong number of a smooth point", std::fabs(par.value[0] - 1.0), 1e-3);
  Series s{"parabola-theta", {"r", "theta", "err"}, {}};
  for (std::size_t k = 0; k < pr.size(); ++k) s.rows.push_back({pr[k], par.value[k], par.error[k]});
  rep.series.push_back(s);

  const auto cusp = density_theta(AlgebraicCurve::cusp(), o2, radii);
  rep.at_most("cusp-lelong-number-2", "Lelong number of the cusp", std::fabs(cusp.value[0] - 2.0), 1e-2);
  const auto cm = density_monotonicity_check(AlgebraicCurve::cusp(), o2, radii, 1e-6);
  rep.at_least("cusp-min-slope", "density monotonicity", cm.min_slope, 1e-6 + cm.slope_error);
  const int mult = multiplicity_by_lines(AlgebraicCurve::cusp(), o2, 21, 7);
  rep.at_most("cusp-multiplicity-by-lines", "Lelong number equals multiplicity", std::fabs(mult - 2.0), 0.0);
  return rep;
}

SuiteReport suite_mean_convexity(const SuiteOptions&) {
  SuiteReport rep{"mean-convexity", {}, {}};
  const Point o1{0.0}, o2{0.0, 0.0};
  const auto radii = log_radii(0.1, 10.0, 9);
  const auto m1 = spherical_mean(PshFunction::from_tag("log|z|"), o1, radii);
  double e = 0.0;
  for (std::size_t k = 0; k < radii.size(); ++k) e = std::max(e, std::fabs(m1.value[k] - std::log(radii[k])));
  rep.at_most("log-z-mean-equals-log-r", "spherical mean of log|z|", e, 1e-10);

  const auto ir = log_radii(0.01, 10.0, 7);
  const std::vector<std::pair<std::string, AlgebraicCurve>> pairs{
      {"log|z1|", AlgebraicCurve::line(1.0, 0.0)},
      {"log|z1z2|", AlgebraicCurve::node()},
      {"log|z2-z1^2|", AlgebraicCurve::parabola()},
      {"log|z2^2-z1^3|", AlgebraicCurve::cusp()}};
  for (const auto& [tag, curve] : pairs) {
    const auto id = logr_derivative_identity(PshFunction::from_tag(tag), curve, o2, ir);
    rep.at_most("identity-gap " + tag, "r dM/dr equals density", id.max_gap, 1e-3);
  }

  const std::vector<std::pair<std::string, Point>> convex{{"log|z|", o1},
                                                          {"|z|^2", o1},
                                                          {"max(log|z|,0)", o1},
                                                          {"log(1+|z|^2)", o1},
                                                          {"log|z1z2|", o2},
                                                          {"log|z2^2-z1^3|", o2}};
  for (const auto& [tag, x] : convex) {
    const auto c = logr_convexity_check(PshFunction::from_tag(tag), x, radii, 1e-6);
    rep.at_least("log-r-convexity " + tag, "mean convex in log r", c.min_second_diff, 1e-6);
  }

  const auto lr = log_radii(1.0, 1e4, 13);
  const auto flat = liouville_demo(PshFunction::constant(5.0, 1), true, o1, lr);
  rep.flag("liouville-constant", "sub-logarithmic psh functions are constant", flat.flagged_constant && flat.consistent);
  const auto sub = liouville_demo(PshFunction::sublog(1), true, o1, log_radii(1.0, 1e6, 13));
  rep.flag("liouville-sublog-sample", "sub-logarithmic psh functions are constant", sub.consistent,
           "non-constant sublog sample is not convex in log r");
  return rep;
}

SuiteReport suite_harmonic_map(const SuiteOptions&) {
  SuiteReport rep{"harmonic-map", {}, {}};
  const std::vector<double> radii{0.25, 0.5, 1.0, 2.0, 4.0};
  const auto rad = harmonic_energy_density(HarmonicMapSpec::radial(3), {0, 0, 0}, radii);
  double e = 0.0, b = 0.0;
  for (std::size_t k = 0; k < radii.size(); ++k) {
    e = std::max(e, std::fabs(rad.energy.value[k] - 8.0 * M_PI));
    b = std::max(b, std::fabs(rad.boundary_term[k]));
  }
  rep.at_most("radial-energy-8pi", "normalized energy of x/|x|", e, 1e-6 * 8.0 * M_PI);
  rep.at_most("radial-boundary-term", "monotonicity boundary term", b, 1e-8);
  Series s{"radial-energy", {"r", "energy", "err"}, {}};
  for (std::size_t k = 0; k < radii.size(); ++k)
    s.rows.push_back({radii[k], rad.energy.value[k], rad.energy.error[k]});
  rep.series.push_back(s);

  const auto lin = harmonic_energy_density(HarmonicMapSpec::linear({{1, 0, 0}, {0, 2, 0}}), {0.1, 0.2, 0.3}, radii);
  double le = 0.0;
  for (std::size_t k = 0; k < radii.size(); ++k) {
    const double want = 5.0 * 4.0 / 3.0 * M_PI * radii[k] * radii[k];
    le = std::max(le, std::fabs(lin.energy.value[k] - want) / want);
  }
  rep.at_most("linear-r2-law", "energy growth of a linear map", le, 1e-8);
  rep.at_most("linear-slope-vs-boundary", "monotonicity identity", lin.max_slope_gap, 1e-6);
  return rep;
}

SuiteReport suite_heatflow(const SuiteOptions& o) {
  SuiteReport rep{"heatflow", {}, {}};
  for (int m : {1, 2, 3}) {
    auto c = flow_cfg("flat-rho", 0.5, 0.5, 1e-2, 1024);
    c.m = m;
    c.rho_max = 1e2;
    const auto tr = checked_run(c);
    const auto& st = tr.states.back();
    const auto& g = st.metric.grid;
    double e = 0.0;
    for (int i = 0; i < g.n && g.rho(i) <= 10.0; ++i) e = std::max(e, std::fabs((*st.scalar)[i] - g.rho(i) - m * 0.5));
    rep.at_most("rho-plus-mt m=" + std::to_string(m), "heat flow of |z|^2", e, 1e-8);
  }

  auto c = flow_cfg("heat-kernel", 0.6, 0.1, 1e-3, o.flow_grid);
  c.t_start = 0.5;
  const auto tr = checked_run(c);
  const auto& st = tr.states.back();
  const auto& g = st.metric.grid;
  double e = 0.0;
  for (int i = 0; i < g.n; ++i) e = std::max(e, std::fabs((*st.scalar)[i] - heat_kernel(g.rho(i), 0.6)));
  rep.at_most("heat-kernel-closed-form", "heat kernel", e, 1e-6);

  std::vector<std::vector<double>> u;
  for (double dt : {1e-2, 5e-3, 2.5e-3}) {
    auto ci = flow_cfg("heat-kernel", 0.6, 0.1, dt, o.flow_grid);
    ci.t_start = 0.5;
    u.push_back(*checked_run(ci).states.back().scalar);
  }
  const double ratio = max_abs_diff(u[0], u[1]) / max_abs_diff(u[1], u[2]);
  rep.at_least("crank-nicolson-self-convergence", "second-order time stepping", ratio - 3.6, 0.0);
  return rep;
}

SuiteReport suite_krflow(const SuiteOptions& o) {
  SuiteReport rep{"krflow", {}, {}};
  double curv = 0.0, step = 0.0;
  for (int m : {1, 2, 3}) {
    auto c = flow_cfg("flat", 1.0, 0.1, 0.05, o.flow_grid);
    c.m = m;
    const auto tr = checked_run(c);
    for (const auto& st : tr.states)
      for (double r : curvature(st.metric).scalar) curv = std::max(curv, std::fabs(r));
    for (std::size_t k = 1; k < tr.states.size(); ++k)
      step = std::max(step, max_abs_diff(tr.states[k].metric.rem_b, tr.states[k - 1].metric.rem_b));
    const auto s = ricci_flow_step_real_2d(tr.states.front());
    step = std::max(step, max_abs_diff(s.metric.rem_b, tr.states.front().metric.rem_b));
  }
  rep.at_most("flat-curvature", "flat metric is a fixed point", curv, 1e-12);
  rep.at_most("flat-step-change", "flat metric is a fixed point", step, 1e-12);

  const auto cig = checked_run(flow_cfg("cigar", 1.0, 0.1, 1e-3, o.flow_grid));
  rep.at_most("cigar-self-similarity", "cigar is a steady soliton", cigar_self_similarity_error(cig, 1e2), 1e-3);
  return rep;
}

SuiteReport suite_lichnerowicz(const SuiteOptions& o) {
  SuiteReport rep{"lichnerowicz", {}, {}};
  const auto tr = checked_run(flow_cfg("cigar-ric", 0.5, 0.05, 1e-3, o.flow_grid));
  double e = 0.0;
  for (const auto& st : tr.states) {
    const auto R = curvature(st.metric).scalar;
    const auto& g = st.metric.grid;
    for (int i = 0; i < g.n && g.rho(i) <= 1e2; ++i) e = std::max(e, std::fabs(st.tensor->rad[i] - R[i]));
  }
  rep.at_most("ricci-tracking", "Ricci tensor solves the Lichnerowicz equation", e, 1e-4);
  double lo = HUGE_VAL;
  for (const auto& st : tr.states) lo = std::min(lo, st.tensor->min_eigenvalue(1));
  const auto bump = checked_run(flow_cfg("cigar-bump", 1.0, 0.05, 1e-3, o.flow_grid));
  for (const auto& st : bump.states) lo = std::min(lo, st.tensor->min_eigenvalue(1));
  rep.at_least("nonnegativity-preserved", "h >= 0 is preserved", lo, 1e-8);
  return rep;
}

SuiteReport suite_hermitian_einstein(const SuiteOptions&) {
  SuiteReport rep{"hermitian-einstein", {}, {}};
  double stat = 0.0;
  for (const auto& st : checked_run(flow_cfg("torus-const", 1.0, 0.1, 1e-2, 2048)).states)
    for (double v : st.bundle->u) stat = std::max(stat, std::fabs(v));
  rep.at_most("constant-trace-stationary", "Hermitian-Einstein flow", stat, 1e-14);

  const auto tr = checked_run(flow_cfg("torus-he", 1.0, 0.05, 1e-2, 2048));
  const auto& b0 = *tr.states.front().bundle;
  double prev = HUGE_VAL, worst_increase = -HUGE_VAL, mean_err = 0.0, ident = 0.0;
  for (const auto& st : tr.states) {
    const auto& B = *st.bundle;
    const auto om = B.omega();
    const auto lap = B.laplacian(B.u);
    double dev = 0.0, mean = 0.0;
    for (int k = 0; k < B.n * B.n; ++k) {
      dev = std::max(dev, std::fabs(om[k] - B.lambda));
      mean += om[k];
      ident = std::max(ident, std::fabs(om[k] + lap[k] - b0.omega0[k]));
    }
    mean_err = std::max(mean_err, std::fabs(mean / (B.n * B.n) - B.lambda));
    if (prev < HUGE_VAL) worst_increase = std::max(worst_increase, dev - prev);
    prev = dev;
  }
  rep.at_most("deviation-decreases", "Hermitian-Einstein flow", worst_increase, 0.0);
  rep.at_most("mean-preserved", "Hermitian-Einstein flow", mean_err, 1e-10);
  rep.at_most("trace-identity", "Hermitian-Einstein flow", ident, 1e-12);
  return rep;
}

SuiteReport suite_lyh(const SuiteOptions& o) {
  SuiteReport rep{"lyh", {}, {}};
  const auto cig = cigar_flow(false);
  const auto cig_real = cigar_flow(true);

  const auto flat = analytic_trajectory("flat-g", {0.5, 1.0, 2.0});
  rep.at_least("Z flat h=g", "linear trace Harnack",
               lyh_scan(flat, LyhKind::LinearZ, {1.0, 2.0}, ScanRegion{1e-2, 1e1, 8}).min_value, 1e-4);
  const auto z = lyh_scan(cig, LyhKind::LinearZ, steps(0.1, 0.9, 8), ScanRegion{1e-4, 1e2, 8});
  rep.at_least("Z cigar h=Ric", "linear trace Harnack", z.min_value, 1e-4);
  rep.series.push_back(scan_series("Z-cigar", z));
  const auto bump = checked_run(flow_cfg("cigar-bump", 0.5, 0.05, 1e-3, o.flow_grid));
  rep.at_least("Z cigar bump", "linear trace Harnack",
               lyh_scan(bump, LyhKind::LinearZ, steps(0.1, 0.45, 7), ScanRegion{1e-4, 1e2, 8}).min_value, 1e-4);
  const auto hk = analytic_trajectory("heat-kernel-tensor", {0.5, 1.0, 1.5});
  rep.at_least("Z heat kernel", "linear trace Harnack",
               lyh_scan(hk, LyhKind::LinearZ, {1.0}, ScanRegion{1e-3, 20.0, 4}).min_value, 1e-4);
  double kahler = HUGE_VAL;
  const auto& grid = cig.states.front().metric.grid;
  for (int i = 0; i < grid.n && grid.rho(i) <= 1e2; i += 4)
    kahler = std::min(kahler, trace_harnack_kahler(cig, at_rho(grid.rho(i)), 1.0, VectorFieldV{{0.0}}).value);
  rep.at_least("trace cigar V=0", "trace Harnack", kahler, 1e-6);

  rep.at_least("Q cigar real", "real linear trace Harnack",
               lyh_scan(cig_real, LyhKind::LinearQ, steps(0.05, 0.45, 8), ScanRegion{1e-4, 1e2, 8}).min_value, 1e-4);
  const auto line = LineField::two_kernels({0.25, 0.5, 1.0, 2.0}, 6.0);
  double two = HUGE_VAL;
  for (double t : line.times)
    for (int k = -20; k <= 20; ++k) {
      const double x = 0.3 * k;
      two = std::min(two, minimize_quadratic(quadratic_linear_Q(line, x, t), LyhKind::LinearQ, Point{cplx(x)})
                              .eval.value);
    }
  rep.at_least("Q two kernels", "real linear trace Harnack", two, 1e-4);

  const auto torus = torus_flow();
  const auto b = lyh_scan(torus, LyhKind::BundleTrace, {0.1, 0.5, 1.0}, ScanRegion{});
  rep.at_least("bundle trace torus", "Hermitian-Einstein trace Harnack", b.min_value, 1e-6);
  rep.series.push_back(scan_series("bundle-torus", b));

  // h = Ric reduces Z to the trace quantity
  const auto tr = analytic_trajectory("cigar-exact-ric", steps(0.95, 1.05, 100));
  const auto tr_real = analytic_trajectory("cigar-exact-real-ric", steps(0.45, 0.55, 100));
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::normal_distribution<double> N(0.0, 1.0);
  double worst = 0.0, worst_real = 0.0;
  for (int k = 0; k < 50; ++k) {
    const double rho = std::exp(std::log(1e-4) + U(rng) * std::log(1e6));
    const int j = 1 + static_cast<int>(U(rng) * 99);
    const VectorFieldV V{{cplx(N(rng), N(rng))}};
    const auto p = at_rho(rho);
    const double t = tr.states[j].t;
    worst = std::max(worst, std::fabs(linear_trace_Z(tr, p, t, V).value - trace_harnack_kahler(tr, p, t, V).value));
    const double tt = tr_real.states[j].t;
    worst_real = std::max(worst_real, std::fabs(linear_trace_Q(tr_real, p, tt, V).value -
                                                0.5 * trace_harnack_ricci(tr_real, p, tt, V).value));
  }
  rep.at_most("reduction h=Ric kahler", "h = Ric reduces Z to the trace quantity", worst, 1e-8);
  rep.at_most("reduction h=Ric real", "h = Ric reduces Q to the trace quantity", worst_real, 1e-8);
  return rep;
}

SuiteReport suite_soliton(const SuiteOptions&) {
  SuiteReport rep{"soliton", {}, {}};
  // heat kernel: analytic identity and gridded minimization
  double an = 0.0, gr = 0.0;
  const auto hk = analytic_trajectory("heat-kernel-tensor", {0.5, 1.0, 1.5});
  for (double rho : {0.01, 0.5, 2.0, 6.0}) {
    for (double t : {0.5, 1.0, 2.0}) an = std::max(an, kernel_identity(rho, t));
    gr = std::max(gr, std::fabs(minimize_V(hk, LyhKind::LinearZ, at_rho(rho), 1.0).eval.value));
  }
  rep.at_most("heat-kernel Z analytic", "equality for the heat kernel", an, 1e-8);
  rep.at_most("heat-kernel Z gridded", "equality for the heat kernel", gr, 1e-4);

  const auto line = LineField::heat_kernel({0.5, 1.0, 2.0});
  double la = 0.0, lg = 0.0;
  for (double x : {0.0, 0.4, -1.2, 3.0}) {
    la = std::max(la, line_kernel_identity(x, 1.0));
    const auto mz = minimize_quadratic(quadratic_linear_Q(line, x, 1.0), LyhKind::LinearQ, Point{cplx(x, 0.0)});
    lg = std::max(lg, std::fabs(mz.eval.value));
  }
  rep.at_most("line-kernel Q analytic", "equality for the real heat kernel", la, 1e-8);
  rep.at_most("line-kernel Q gridded", "equality for the real heat kernel", lg, 1e-4);

  const auto exact = analytic_trajectory("cigar-exact", steps(0.8, 1.2, 40));
  const auto cig = cigar_flow(false);
  double anc = 0.0;
  for (double rho : {1e-3, 0.1, 1.0, 10.0, 90.0}) {
    const auto p = at_rho(rho);
    const VectorFieldV V{{p[0]}};
    anc = std::max(anc, std::fabs(trace_harnack_kahler(exact, p, 1.0, V).ancient_value));
    anc = std::max(anc, std::fabs(trace_harnack_kahler(cig, p, 0.5, V).ancient_value));
  }
  rep.at_most("cigar ancient trace", "steady soliton equality", anc, 1e-4);

  const auto fg = analytic_trajectory("flat-g", {0.5, 1.0, 2.0});
  const auto& grid = fg.states.front().metric.grid;
  const RadialVectorField Vg{grid, std::vector<double>(grid.n, 0.5)};
  double fr = 0.0;
  for (double rho : {1e-3, 1.0, 30.0}) {
    const auto r = soliton_residuals(fg, at_rho(rho), 2.0, Vg);
    fr = std::max({fr, r.soliton_eq, r.holomorphy});
  }
  rep.at_most("flat Gaussian residuals along the flow", "expanding soliton equations", fr, 1e-12);
  const auto gauss = expanding_soliton_construct(1, 2.0, 0.0).second;
  rep.at_most("flat Gaussian residuals", "expanding soliton equations",
              std::max(gauss.soliton_residual, gauss.holomorphy_residual), 0.0);

  const auto [metric, spec] = expanding_soliton_construct(1, 1.0, 0.5);
  rep.at_most("expanding soliton residuals", "expanding soliton equations",
              std::max(spec.soliton_residual, spec.holomorphy_residual), 1e-8);
  (void)metric;
  FlowRunConfig c;
  c.initial = "expanding-soliton";
  c.t_start = 1.0;
  c.t_end = 1.2;
  c.stride = 0.01;
  const auto es = checked_run(c);
  const auto scan = lyh_scan(es, LyhKind::TraceKahler, {1.0}, ScanRegion{});
  rep.at_most("expanding soliton minimized trace", "soliton equality", std::fabs(scan.min_value), 1e-4);

  // every scan whose minimum is ~0 has small soliton residuals at the argmin
  double worst_res = 0.0;
  int near_zero = 0;
  const std::vector<ScanReport> scans{
      scan, lyh_scan(hk, LyhKind::LinearZ, {1.0}, ScanRegion{1e-3, 20.0, 4}),
      lyh_scan(cig, LyhKind::LinearZ, {0.2, 0.5, 0.8}, ScanRegion{1e-4, 1e2, 4}, true)};
  for (const auto& s : scans) {
    if (std::fabs(s.min_value) > 1e-4 || !s.residuals_available) continue;
    ++near_zero;
    worst_res = std::max({worst_res, s.residuals.soliton_eq, s.residuals.holomorphy});
  }
  rep.at_most("residuals at equality argmins", "equality only on solitons", worst_res, 1e-3);
  rep.flag("equality scans found", "equality only on solitons", near_zero == static_cast<int>(scans.size()));
  return rep;
}

SuiteReport suite_parabolic(const SuiteOptions&) {
  SuiteReport rep{"parabolic", {}, {}};
  std::vector<double> times;
  for (int k = 1; k <= 20; ++k) times.push_back(0.1 * k);
  FlowRunConfig c;
  c.t_end = 2.0;
  c.stride = 0.1;
  c.initial = "flat-rho";
  const auto a = parabolic_monotonicity_check(run_flow(c), {0.0, 0.5, 2.0}, times, 1e-6);
  rep.at_least("flat-rho t u_t slope", "parabolic monotonicity", a.min_tw, 1e-6);
  c.initial = "flat-log";
  const auto b = parabolic_monotonicity_check(run_flow(c), {0.0, 0.1, 1.0, 10.0}, times, 1e-6);
  rep.at_least("flat-log t u_t slope", "parabolic monotonicity", b.min_tw, 1e-6);

  std::vector<double> ht;
  for (int k = 1; k <= 9; ++k) ht.push_back(0.25 * k);
  const auto traj = heat_potential_trajectory(ht);
  const auto off = parabolic_monotonicity_check(traj, {0.5, 2.0}, ht, 1e-8);
  rep.at_least("heat potential off origin", "parabolic monotonicity", off.min_tw, 1e-6);
  const auto origin = parabolic_monotonicity_check(traj, {0.0}, ht, 1e-8);
  double e = 0.0;
  for (double v : origin.tw) e = std::max(e, std::fabs(v));
  rep.at_most("heat potential origin equality", "equality locus", e, 1e-8);
  Series s{"heat-potential-origin", {"t", "tw"}, {}};
  for (std::size_t k = 0; k < origin.tw.size(); ++k) s.rows.push_back({ht[k + 1], origin.tw[k]});
  rep.series.push_back(s);
  return rep;
}

SuiteReport suite_harnack(const SuiteOptions& o) {
  SuiteReport rep{"harnack", {}, {}};
  const double R = o.R;
  const RealFunction zero = [](const RealPoint&) { return 0.0; };
  auto r2 = [](const RealPoint& x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return s;
  };

  const BoxGrid g(1, o.harnack_grid, 2.0 * R);
  const auto I = CoefficientField::identity(g);
  const auto aff = solve_nondivergence(I, zero, [&](const RealPoint& x) { return x[0] / R + 3.0; }, 2.0 * R);
  rep.at_most("affine ratio", "Harnack ratio fixture", std::fabs(ball_extremes(aff, R).ratio - 2.0), 1e-6);
  const auto cst = solve_nondivergence(CoefficientField::random(g, o.lambda, o.Lambda, o.seed), zero,
                                       [](const RealPoint&) { return 2.5; }, 2.0 * R);
  rep.at_most("constant ratio", "Harnack ratio fixture", std::fabs(ball_extremes(cst, R).ratio - 1.0), 1e-12);

  const BoxGrid big(1, 281, 7.0 * R);
  const auto Ib = CoefficientField::identity(big);
  const auto pz = volume_inequality_eval(zero, Ib, R);
  const auto pq = volume_inequality_eval([&](const RealPoint& x) { return r2(x) / (4.0 * R * R); }, Ib, R);
  rep.flag("volume inequality u=0", "volume inequality", pz.holds);
  rep.flag("volume inequality quadratic", "volume inequality", pq.holds);

  const BoxGrid cg(1, 141, 7.0 * R);
  const auto Ez = contact_set_construct(zero, R, cg);
  const auto cz = contact_determinant_chain(zero, CoefficientField::identity(cg), R, Ez);
  rep.flag("chain u=0", "determinant chain", cz.holds && Ez.covers);
  const RealPoint p{0.5 * R, -0.25 * R};
  auto well = [&](const RealPoint& x) { return 0.6 * r2({x[0] - p[0], x[1] - p[1]}) / (2.0 * R * R); };
  const auto Ew = contact_set_construct(well, R, cg, 2);
  const auto cw = contact_determinant_chain(well, CoefficientField::random(cg, o.lambda, o.Lambda, o.seed + 1), R, Ew);
  rep.at_most("chain quadratic well", "determinant chain", cw.max_violation, 1e-8);

  const auto t = harnack_random_trials(o.harnack_m, 141, R, o.lambda, o.Lambda, o.harnack_trials, o.seed);
  rep.at_most("random trials volume violations", "volume inequality", t.volume_violations, 0.0);
  rep.at_most("random trials chain violations", "determinant chain", t.chain_violations, 0.0);
  rep.flag("random trials contact coverage", "contact set construction", t.coverage && t.contact_points > 0);

  ProbeConfig pc;
  pc.m = o.harnack_m;
  pc.n = o.harnack_grid;
  pc.lambda = o.lambda;
  pc.Lambda = o.Lambda;
  pc.R = R;
  pc.trials = o.harnack_trials;
  pc.seed = o.seed;
  const auto a = harnack_ratio_probe(pc);
  pc.seed = o.seed ^ 0x9e3779b97f4a7c15ull;
  const auto b = harnack_ratio_probe(pc);
  double lo = HUGE_VAL;
  for (const auto* st : {&a, &b})
    for (double r : st->ratios) lo = std::min(lo, r);
  rep.at_least("ratios at least one", "Harnack inequality", lo - 1.0, 0.0);
  rep.at_most("q90 agreement", "Harnack constant", std::fabs(a.q90 - b.q90) / std::max(a.q90, b.q90), 0.1);
  Series s{"ratios", {"set", "trial", "ratio"}, {}};
  for (std::size_t k = 0; k < a.ratios.size(); ++k) s.rows.push_back({0.0, double(k), a.ratios[k]});
  for (std::size_t k = 0; k < b.ratios.size(); ++k) s.rows.push_back({1.0, double(k), b.ratios[k]});
  rep.series.push_back(s);
  return rep;
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"hermitian",    "density", "mean-convexity", "harmonic-map",
                                              "heatflow",     "krflow",  "lichnerowicz",   "hermitian-einstein",
                                              "lyh",          "soliton", "parabolic",      "harnack"};
  return names;
}

SuiteReport run_suite(const std::string& name, const SuiteOptions& o) {
  static const std::map<std::string, std::function<SuiteReport(const SuiteOptions&)>> table{
      {"hermitian", suite_hermitian},       {"density", suite_density},
      {"mean-convexity", suite_mean_convexity}, {"harmonic-map", suite_harmonic_map},
      {"heatflow", suite_heatflow},         {"krflow", suite_krflow},
      {"lichnerowicz", suite_lichnerowicz}, {"hermitian-einstein", suite_hermitian_einstein},
      {"lyh", suite_lyh},                   {"soliton", suite_soliton},
      {"parabolic", suite_parabolic},       {"harnack", suite_harnack}};
  const auto it = table.find(name);
  if (it == table.end()) throw InputError("unknown suite '" + name + "'");
  return it->second(o);
}

SuiteReport density_run(const std::string& curve, const std::vector<double>& center, const std::vector<double>& radii,
                        double tol) {
  const auto c = AlgebraicCurve::from_tag(curve);
  Point x(c.m, cplx(0.0));
  if (center.size() == 1) std::fill(x.begin(), x.end(), cplx(center[0]));
  else if (center.size() == 2 * static_cast<std::size_t>(c.m))
    for (int a = 0; a < c.m; ++a) x[a] = cplx(center[2 * a], center[2 * a + 1]);
  else if (!center.empty()) throw InputError("center: give one value or 2m real coordinates");
  SuiteReport rep{"density", {}, {}};
  const auto d = density_theta(c, x, radii);
  Series s{"theta", {"r", "theta", "err"}, {}};
  for (std::size_t k = 0; k < radii.size(); ++k) s.rows.push_back({radii[k], d.value[k], d.error[k]});
  rep.series.push_back(s);
  if (radii.size() >= 3) {
    const auto mono = density_monotonicity_check(c, x, radii, tol);
    rep.at_least("theta-min-slope " + curve, "density monotonicity", mono.min_slope, tol + mono.slope_error);
  } else {
    double drop = -HUGE_VAL;
    for (std::size_t k = 1; k < radii.size(); ++k) drop = std::max(drop, d.value[k - 1] - d.value[k]);
    if (radii.size() > 1) rep.at_most("theta-nondecreasing " + curve, "density monotonicity", drop, tol);
  }
  return rep;
}

const std::vector<std::string>& lyh_fixtures() {
  static const std::vector<std::string> names{"heat-kernel-equality", "flat",       "cigar",       "cigar-ancient",
                                              "cigar-bump",           "cigar-real", "line-kernel", "two-kernels",
                                              "torus",                "expanding-soliton"};
  return names;
}

SuiteReport lyh_run(const std::string& kind_name, const std::string& fixture, double tol) {
  const LyhKind kind = lyh_kind_from_string(kind_name);
  SuiteReport rep{"lyh", {}, {}};
  const std::string label = std::string(to_string(kind)) + " " + fixture;

  if (fixture == "line-kernel" || fixture == "two-kernels") {
    if (kind != LyhKind::LinearQ) throw InputError("fixture " + fixture + " carries a real tensor: use --kind linear-Q");
    const bool eq = fixture == "line-kernel";
    const auto line = eq ? LineField::heat_kernel({0.5, 1.0, 2.0}) : LineField::two_kernels({0.25, 0.5, 1.0, 2.0}, 6.0);
    Series s{"min", {"t", "min"}, {}};
    double lo = HUGE_VAL;
    for (std::size_t j = 1; j + 1 < line.times.size(); ++j) {
      double m = HUGE_VAL;
      for (int k = -10; k <= 10; ++k) {
        const double x = 0.4 * k;
        m = std::min(m, minimize_quadratic(quadratic_linear_Q(line, x, line.times[j]), kind, Point{cplx(x)}).eval.value);
      }
      s.rows.push_back({line.times[j], m});
      lo = std::min(lo, m);
    }
    rep.series.push_back(s);
    if (eq) rep.at_most("min " + label, "equality for the real heat kernel", std::fabs(lo), tol);
    else rep.at_least("min " + label, "real linear trace Harnack", lo, tol);
    return rep;
  }

  Trajectory tr;
  std::vector<double> times;
  ScanRegion region{1e-4, 1e2, 4};
  bool ancient = false, equality = false;
  if (fixture == "heat-kernel-equality") {
    tr = analytic_trajectory("heat-kernel-tensor", {0.5, 1.0, 1.5});
    times = {1.0};
    region = ScanRegion{1e-3, 20.0, 4};
    equality = true;
  } else if (fixture == "flat") {
    tr = analytic_trajectory("flat-g", {0.5, 1.0, 2.0});
    times = {1.0, 2.0};
    region = ScanRegion{1e-2, 1e1, 8};
  } else if (fixture == "cigar" || fixture == "cigar-ancient") {
    tr = cigar_flow(false);
    ancient = fixture == "cigar-ancient";
    equality = ancient;
    times = ancient ? std::vector<double>{0.2, 0.5, 0.8} : steps(0.1, 0.9, 8);
    region.stride = ancient ? 4 : 8;
  } else if (fixture == "cigar-bump") {
    tr = checked_run(flow_cfg("cigar-bump", 0.5, 0.05, 1e-3, 2048));
    times = steps(0.1, 0.45, 7);
    region.stride = 8;
  } else if (fixture == "cigar-real") {
    tr = cigar_flow(true);
    times = steps(0.05, 0.45, 8);
    region.stride = 8;
  } else if (fixture == "torus") {
    tr = torus_flow();
    times = {0.1, 0.5, 1.0};
    region = ScanRegion{};
  } else if (fixture == "expanding-soliton") {
    FlowRunConfig c;
    c.initial = "expanding-soliton";
    c.t_start = 1.0;
    c.t_end = 1.2;
    c.stride = 0.01;
    tr = checked_run(c);
    times = {1.0};
    region = ScanRegion{};
    equality = true;
  } else {
    throw InputError("unknown LYH fixture '" + fixture + "'");
  }
  const auto scan = lyh_scan(tr, kind, times, region, ancient);
  rep.series.push_back(scan_series("min", scan));
  if (equality) rep.at_most("min " + label, "Harnack equality", std::fabs(scan.min_value), tol);
  else rep.at_least("min " + label, "Harnack inequality", scan.min_value, tol);
  rep.flag("certified " + label, "minimizer certification", scan.all_certified);
  if (scan.residuals_available && std::fabs(scan.min_value) <= 1e-4)
    rep.at_most("soliton residuals at argmin " + label, "equality only on solitons",
                std::max(scan.residuals.soliton_eq, scan.residuals.holomorphy), 1e-3);
  return rep;
}

SuiteReport harnack_probe_run(int m, int n, double lambda, double Lambda, double R, int trials, std::uint64_t seed) {
  ProbeConfig pc;
  pc.m = m;
  pc.n = n;
  pc.lambda = lambda;
  pc.Lambda = Lambda;
  pc.R = R;
  pc.trials = trials;
  pc.seed = seed;
  const auto st = harnack_ratio_probe(pc);
  SuiteReport rep{"harnack", {}, {}};
  double lo = HUGE_VAL;
  for (double r : st.ratios) lo = std::min(lo, r);
  rep.at_least("ratios at least one", "Harnack inequality", lo - 1.0, 0.0);
  rep.at_most("discarded trials", "Harnack inequality", st.discarded, 0.0);
  Series s{"ratios", {"trial", "ratio"}, {}};
  for (std::size_t k = 0; k < st.ratios.size(); ++k) s.rows.push_back({double(k), st.ratios[k]});
  rep.series.push_back(s);
  Series q{"quantiles", {"q50", "q90", "max"}, {{st.q50, st.q90, st.max}}};
  rep.series.push_back(q);
  return rep;
}

}  // namespace klab
