#include "klab/lyh.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <random>

#include "klab/errors.hpp"

namespace klab {

const char* to_string(LyhKind k) {
  switch (k) {
    case LyhKind::TraceRicci: return "trace-ricci";
    case LyhKind::TraceKahler: return "trace-kahler";
    case LyhKind::LinearZ: return "linear-Z";
    case LyhKind::LinearQ: return "linear-Q";
    case LyhKind::BundleTrace: return "bundle-trace";
  }
  return "unknown";
}

LyhKind lyh_kind_from_string(const std::string& s) {
  for (auto k : {LyhKind::TraceRicci, LyhKind::TraceKahler, LyhKind::LinearZ, LyhKind::LinearQ,
                 LyhKind::BundleTrace})
    if (s == to_string(k)) return k;
  throw InputError("unknown LYH kind '" + s + "'");
}

bool is_real_kind(LyhKind k) { return k == LyhKind::TraceRicci || k == LyhKind::LinearQ; }

std::vector<cplx> VectorFieldV::lowered(const std::vector<double>& g) const {
  if (g.size() != v.size()) throw InputError("VectorFieldV: metric dimension mismatch");
  std::vector<cplx> out(v.size());
  for (std::size_t a = 0; a < v.size(); ++a) out[a] = g[a] * v[a];
  return out;
}

VectorFieldV VectorFieldV::raised(const std::vector<cplx>& low, const std::vector<double>& g) {
  if (g.size() != low.size()) throw InputError("VectorFieldV: metric dimension mismatch");
  VectorFieldV V;
  V.v.resize(low.size());
  for (std::size_t a = 0; a < low.size(); ++a) V.v[a] = low[a] / g[a];
  return V;
}

VectorFieldV RadialVectorField::at(const Point& z) const {
  if (z.size() != 1) throw InputError("RadialVectorField: m = 1 points only");
  const double rho = std::norm(z[0]);
  return VectorFieldV{{interp_rho(grid, phi, rho) * z[0]}};
}

double LyhQuadratic::value(const VectorFieldV& V) const {
  if (static_cast<Eigen::Index>(V.v.size()) != b.size()) throw InputError("V has the wrong dimension");
  const Eigen::Map<const Eigen::VectorXcd> v(V.v.data(), b.size());
  return c + 2.0 * (b.transpose() * v)(0).real() + (v.adjoint() * A * v)(0).real();
}

namespace {

double rho_of(const Point& z) {
  if (z.empty()) throw InputError("empty point");
  double r = 0.0;
  for (auto c : z) {
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) throw InputError("non-finite point");
    r += std::norm(c);
  }
  return r;
}

// d/dt weights at snapshot k: centred three-point inside, one-sided at the ends.
struct TimeStencil {
  std::vector<std::size_t> idx;
  std::vector<double> w;
  bool one_sided = false;
};

TimeStencil time_stencil(const Trajectory& traj, std::size_t k) {
  const std::size_t n = traj.states.size();
  if (n < 3) throw InputError("time derivative needs at least three snapshots");
  TimeStencil st;
  std::size_t first = k == 0 ? 0 : (k + 1 == n ? n - 3 : k - 1);
  st.one_sided = k == 0 || k + 1 == n;
  std::vector<double> ts;
  for (std::size_t j = first; j < first + 3; ++j) {
    st.idx.push_back(j);
    ts.push_back(traj.states[j].t);
  }
  st.w = fornberg_weights(traj.states[k].t, ts, 1)[1];
  return st;
}

// Profiles of one radial snapshot (m = 1, or flat of any m).
struct RadialSnap {
  const RadialGrid* grid = nullptr;
  int m = 1;
  bool flat = false;
  MetricFlow flow = MetricFlow::Static;
  std::vector<double> b, R, Rrho, lapR;
  bool has_h = false;
  double h_const = 0.0;  // m >= 2: h = h_const g
  std::vector<double> H, Hrho, lapH;
  double r_scale = 0.0, h_scale = 0.0;  // max |R b|, max |H b|

  double at(const std::vector<double>& f, double rho) const { return interp_rho(*grid, f, rho); }
};

// Near the origin the s-derivatives of f pick up rounding magnified by 1/rho.
// f is smooth in rho there, so on rho < 1e-1 f, f_rho and Delta f are blended
// (fully below 2e-2) into a degree-6 least-squares fit over [1e-2, 2e-1].
void origin_fit(const RadialGrid& grid, const std::vector<double>& b, std::vector<double>& f,
                std::vector<double>& frho, std::vector<double>& lap) {
  constexpr double lo = 1e-2, hi = 2e-1, inner = 2e-2, outer = 1e-1;
  constexpr int deg = 6;
  if (grid.rho(0) >= lo) return;
  std::vector<int> rows;
  for (int i = 0; i < grid.n && grid.rho(i) <= hi; ++i)
    if (grid.rho(i) >= lo) rows.push_back(i);
  if (static_cast<int>(rows.size()) < 2 * (deg + 1)) return;
  Eigen::MatrixXd V(rows.size(), deg + 1);
  Eigen::VectorXd y(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const double x = grid.rho(rows[r]) / hi;
    for (int k = 0; k <= deg; ++k) V(r, k) = std::pow(x, k);
    y(r) = f[rows[r]];
  }
  const Eigen::VectorXd c = V.colPivHouseholderQr().solve(y);
  const double span = std::log(outer / inner);
  for (int i = 0; i < grid.n && grid.rho(i) < outer; ++i) {
    const double rho = grid.rho(i), x = rho / hi;
    double p = 0.0, p1 = 0.0, p2 = 0.0;
    for (int k = deg; k >= 0; --k) {
      p2 = p2 * x + 2.0 * p1;
      p1 = p1 * x + p;
      p = p * x + c(k);
    }
    p1 /= hi;
    p2 /= hi * hi;
    const double u = std::clamp((grid.s(i) - std::log(inner)) / span, 0.0, 1.0);
    const double w = 0.5 * (1.0 + std::cos(M_PI * u));
    f[i] = w * p + (1.0 - w) * f[i];
    frho[i] = w * p1 + (1.0 - w) * frho[i];
    lap[i] = w * (p1 + rho * p2) / b[i] + (1.0 - w) * lap[i];
  }
}

RadialSnap make_snap(const FlowState& st) {
  const auto& g = st.metric;
  RadialSnap s;
  s.grid = &g.grid;
  s.m = g.m;
  s.flat = g.flat;
  s.flow = st.metric_flow;
  if (g.m != 1 && !g.flat) throw InputError("LYH quantities: m >= 2 only on flat metrics");
  const int n = g.grid.n;
  const Differentiator D(g.grid);
  s.b.resize(n);
  for (int i = 0; i < n; ++i) s.b[i] = g.b(i);
  auto derived = [&](std::vector<double>& f, std::vector<double>& frho, std::vector<double>& lap) {
    std::vector<double> shifted = f;
    for (auto& v : shifted) v -= f.front();
    const auto fs = D.d1(shifted), fss = D.d2(shifted);
    frho.resize(n);
    lap.resize(n);
    for (int i = 0; i < n; ++i) {
      const double rho = g.grid.rho(i);
      frho[i] = fs[i] / rho;
      lap[i] = fss[i] / (rho * s.b[i]);
    }
    origin_fit(g.grid, s.b, f, frho, lap);
  };
  if (g.flat) {
    s.R.assign(n, 0.0);
    s.Rrho.assign(n, 0.0);
    s.lapR.assign(n, 0.0);
  } else {
    s.R = curvature(g).scalar;
    derived(s.R, s.Rrho, s.lapR);
  }
  for (int i = 0; i < n; ++i) s.r_scale = std::max(s.r_scale, std::fabs(s.R[i] * s.b[i]));
  if (st.tensor) {
    s.has_h = true;
    const auto& h = *st.tensor;
    if (static_cast<int>(h.rad.size()) != n) throw InputError("tensor field not aligned with the grid");
    if (g.m >= 2) {
      s.h_const = h.rad[0];
      for (int i = 0; i < n; ++i)
        if (h.rad[i] != s.h_const || h.sph[i] != s.h_const)
          throw InputError("LYH quantities: m >= 2 needs a constant tensor c g");
    } else {
      s.H = h.rad;
      derived(s.H, s.Hrho, s.lapH);
      for (int i = 0; i < n; ++i) s.h_scale = std::max(s.h_scale, std::fabs(s.H[i] * s.b[i]));
    }
  }
  return s;
}

class RadialEvaluator {
 public:
  explicit RadialEvaluator(const Trajectory& traj) : traj_(traj), snaps_(traj.states.size()) {
    if (traj.states.empty()) throw InputError("empty trajectory");
  }

  const RadialSnap& snap(std::size_t k) {
    if (!snaps_[k]) snaps_[k] = make_snap(traj_.states[k]);
    return *snaps_[k];
  }

  std::size_t index(double t) const { return traj_.index_of(t); }

  // dR/dt at fixed rho (Kahler scalar curvature).
  double R_t(std::size_t k, double rho, bool& one_sided) {
    const auto st = time_stencil(traj_, k);
    one_sided = st.one_sided;
    double d = 0.0;
    for (std::size_t j = 0; j < st.idx.size(); ++j) {
      const auto& s = snap(st.idx[j]);
      d += st.w[j] * s.at(s.R, rho);
    }
    return d;
  }

  const Trajectory& traj() const { return traj_; }

 private:
  const Trajectory& traj_;
  std::vector<std::optional<RadialSnap>> snaps_;
};

void require_flow(const RadialSnap& s, bool real) {
  if (s.flow == MetricFlow::Static) return;
  if (real && s.flow != MetricFlow::Real) throw InputError("real-convention quantity on a Kahler trajectory");
  if (!real && s.flow != MetricFlow::Kahler) throw InputError("Kahler quantity on a real-convention trajectory");
}

LyhQuadratic zero_quadratic(int m, double t) {
  LyhQuadratic q;
  q.b = Eigen::VectorXcd::Zero(m);
  q.A = Eigen::MatrixXcd::Zero(m, m);
  q.t = t;
  return q;
}

void check_t(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw InputError("LYH quantities need t > 0");
}

LyhQuadratic quad_trace(RadialEvaluator& ev, const Point& z, double t, bool real) {
  check_t(t);
  const std::size_t k = ev.index(t);
  const auto& s = ev.snap(k);
  require_flow(s, real);
  if (static_cast<int>(z.size()) != s.m) throw InputError("point dimension does not match the metric");
  const double rho = rho_of(z);
  auto q = zero_quadratic(s.m, t);
  if (s.flat) return q;  // every term vanishes
  bool one_sided = false;
  const double R = s.at(s.R, rho), Rt = ev.R_t(k, rho, one_sided);
  const double Rrho = s.at(s.Rrho, rho), b = s.at(s.b, rho);
  const cplx dzR = std::conj(z[0]) * Rrho;
  q.one_sided = one_sided;
  if (real) {
    // G = 2 g |dz|^2: scalar curvature 2R, Ric = R G, V packed as V^x + i V^y.
    q.trace_h = 2.0 * R;
    q.c = 2.0 * Rt + q.trace_h / t;
    q.b(0) = 4.0 * dzR;
    q.A(0, 0) = 4.0 * R * b;
    q.a_scale = 4.0 * s.r_scale;
  } else {
    q.trace_h = R;
    q.c = Rt + R / t;
    q.b(0) = dzR;
    q.A(0, 0) = R * b;
    q.a_scale = s.r_scale;
  }
  return q;
}

LyhQuadratic quad_linear(RadialEvaluator& ev, const Point& z, double t, bool real) {
  check_t(t);
  const auto& s = ev.snap(ev.index(t));
  require_flow(s, real);
  if (!s.has_h) throw InputError("trajectory carries no tensor field");
  if (static_cast<int>(z.size()) != s.m) throw InputError("point dimension does not match the metric");
  const double rho = rho_of(z);
  auto q = zero_quadratic(s.m, t);
  if (s.m >= 2) {
    // Flat, h = c g.
    q.trace_h = s.m * s.h_const * (real ? 2.0 : 1.0);
    q.A = Eigen::MatrixXcd::Identity(s.m, s.m) * (real ? 2.0 : 1.0) * s.h_const;
    q.inv_t_weight = real ? 0.5 : 1.0;
    q.c = q.inv_t_weight * q.trace_h / t;
    q.a_scale = std::fabs(q.A(0, 0).real());
    return q;
  }
  const double H = s.at(s.H, rho), Hrho = s.at(s.Hrho, rho), lapH = s.at(s.lapH, rho);
  const double R = s.at(s.R, rho), b = s.at(s.b, rho);
  const cplx dzH = std::conj(z[0]) * Hrho;
  if (real) {
    // h = P G with P = H: div div h = Delta_G P = 2 Delta P, R_ij h_ij = 2 R P, tr h = 2P.
    q.trace_h = 2.0 * H;
    q.inv_t_weight = 0.5;
    q.c = 2.0 * lapH + 2.0 * R * H + 0.5 * q.trace_h / t;
    q.b(0) = 2.0 * dzH;
    q.A(0, 0) = 2.0 * H * b;
    q.a_scale = 2.0 * s.h_scale;
  } else {
    q.trace_h = H;
    q.c = lapH + R * H + H / t;
    q.b(0) = dzH;
    q.A(0, 0) = H * b;
    q.a_scale = s.h_scale;
  }
  return q;
}

// --- torus ----------------------------------------------------------------

struct TorusSnap {
  int n = 0;
  std::vector<double> omega, ox, oy;
  double scale = 0.0;
};

TorusSnap make_torus_snap(const TorusBundle& B) {
  TorusSnap s;
  s.n = B.n;
  s.omega = B.omega();
  for (double v : s.omega) s.scale = std::max(s.scale, std::fabs(v));
  const int n = B.n;
  const double h = B.spacing();
  s.ox.resize(n * n);
  s.oy.resize(n * n);
  auto id = [n](int i, int j) { return ((j + n) % n) * n + (i + n) % n; };
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const auto& f = s.omega;
      s.ox[id(i, j)] = (f[id(i - 2, j)] - 8.0 * f[id(i - 1, j)] + 8.0 * f[id(i + 1, j)] - f[id(i + 2, j)]) / (12.0 * h);
      s.oy[id(i, j)] = (f[id(i, j - 2)] - 8.0 * f[id(i, j - 1)] + 8.0 * f[id(i, j + 1)] - f[id(i, j + 2)]) / (12.0 * h);
    }
  }
  return s;
}

int torus_node(const TorusBundle& B, const Point& x) {
  if (x.size() != 1) throw InputError("torus points are x + iy");
  const double h = B.spacing();
  const double fi = x[0].real() / h, fj = x[0].imag() / h;
  const long i = std::lround(fi), j = std::lround(fj);
  if (std::fabs(fi - i) > 1e-9 || std::fabs(fj - j) > 1e-9) throw InputError("torus point is not a grid node");
  const int n = B.n;
  return static_cast<int>(((j % n + n) % n) * n + (i % n + n) % n);
}

class TorusEvaluator {
 public:
  explicit TorusEvaluator(const Trajectory& traj) : traj_(traj), snaps_(traj.states.size()) {
    if (traj.states.empty() || !traj.states.front().bundle) throw InputError("trajectory carries no bundle");
    const auto& om0 = traj.states.front().bundle->omega0;
    if (*std::min_element(om0.begin(), om0.end()) < 0.0) {
      throw InputError("bundle trace needs Omega(., 0) >= 0");
    }
  }
  const TorusSnap& snap(std::size_t k) {
    if (!snaps_[k]) snaps_[k] = make_torus_snap(*traj_.states[k].bundle);
    return *snaps_[k];
  }
  LyhQuadratic quad(const Point& x, double t) {
    check_t(t);
    const std::size_t k = traj_.index_of(t);
    const int node = torus_node(*traj_.states[k].bundle, x);
    const auto st = time_stencil(traj_, k);
    double om_t = 0.0;
    for (std::size_t j = 0; j < st.idx.size(); ++j) om_t += st.w[j] * snap(st.idx[j]).omega[node];
    const auto& s = snap(k);
    auto q = zero_quadratic(1, t);
    const double om = s.omega[node];
    q.trace_h = om;
    q.c = om_t + om / t;
    q.b(0) = 0.5 * cplx(s.ox[node], -s.oy[node]);  // d_z Omega
    q.A(0, 0) = om;                                 // g_{z zbar} = 1
    q.a_scale = s.scale;
    q.one_sided = st.one_sided;
    return q;
  }
  const Trajectory& traj() const { return traj_; }

 private:
  const Trajectory& traj_;
  std::vector<std::optional<TorusSnap>> snaps_;
};

LyhEvaluation make_eval(const LyhQuadratic& q, LyhKind kind, const Point& point, const VectorFieldV& V) {
  LyhEvaluation e;
  e.kind = kind;
  e.point = point;
  e.t = q.t;
  e.value = q.value(V);
  e.trace_h = q.trace_h;
  e.ancient_value = e.value - q.inv_t_weight * q.trace_h / q.t;
  e.v_used = V;
  e.one_sided = q.one_sided;
  return e;
}

}  // namespace

LyhQuadratic quadratic_trace_ricci(const Trajectory& traj, const Point& z, double t) {
  RadialEvaluator ev(traj);
  return quad_trace(ev, z, t, true);
}

LyhQuadratic quadratic_trace_kahler(const Trajectory& traj, const Point& z, double t) {
  RadialEvaluator ev(traj);
  return quad_trace(ev, z, t, false);
}

LyhQuadratic quadratic_linear_Z(const Trajectory& traj, const Point& z, double t) {
  RadialEvaluator ev(traj);
  return quad_linear(ev, z, t, false);
}

LyhQuadratic quadratic_linear_Q(const Trajectory& traj, const Point& z, double t) {
  RadialEvaluator ev(traj);
  return quad_linear(ev, z, t, true);
}

LyhQuadratic quadratic_bundle_trace(const Trajectory& traj, const Point& x, double t) {
  TorusEvaluator ev(traj);
  return ev.quad(x, t);
}

LyhQuadratic quadratic_linear_Q(const LineField& line, double x, double t) {
  check_t(t);
  std::size_t k = line.times.size();
  for (std::size_t j = 0; j < line.times.size(); ++j)
    if (std::fabs(line.times[j] - t) <= 1e-12 * std::max(1.0, t)) k = j;
  if (k == line.times.size()) throw InputError("line field has no snapshot at t");
  const int n = static_cast<int>(line.x.size());
  const double dx = line.x[1] - line.x[0];
  const double fi = (x - line.x[0]) / dx;
  const long i = std::lround(fi);
  if (std::fabs(fi - i) > 1e-9 || i < 2 || i > n - 3) throw InputError("line point must be an interior grid node");
  const auto& h = line.h[k];
  const double hx = (h[i - 2] - 8.0 * h[i - 1] + 8.0 * h[i + 1] - h[i + 2]) / (12.0 * dx);
  const double hxx = (-h[i - 2] + 16.0 * h[i - 1] - 30.0 * h[i] + 16.0 * h[i + 1] - h[i + 2]) / (12.0 * dx * dx);
  auto q = zero_quadratic(1, t);
  q.trace_h = h[i];
  q.inv_t_weight = 0.5;
  q.c = hxx + 0.5 * h[i] / t;
  q.b(0) = hx;
  q.A(0, 0) = h[i];
  for (double v : h) q.a_scale = std::max(q.a_scale, std::fabs(v));
  return q;
}

LineField LineField::heat_kernel(const std::vector<double>& times, double half_width, int n) {
  LineField f;
  f.times = times;
  for (int i = 0; i < n; ++i) f.x.push_back(-half_width + 2.0 * half_width * i / (n - 1));
  for (double t : times) {
    check_t(t);
    std::vector<double> h(n);
    for (int i = 0; i < n; ++i) h[i] = std::exp(-f.x[i] * f.x[i] / (4.0 * t)) / std::sqrt(4.0 * M_PI * t);
    f.h.push_back(std::move(h));
  }
  return f;
}

LineField LineField::two_kernels(const std::vector<double>& times, double sep, double half_width, int n) {
  LineField f;
  f.times = times;
  for (int i = 0; i < n; ++i) f.x.push_back(-half_width + 2.0 * half_width * i / (n - 1));
  for (double t : times) {
    check_t(t);
    std::vector<double> h(n);
    for (int i = 0; i < n; ++i) {
      const double a = f.x[i] - 0.5 * sep, c = f.x[i] + 0.5 * sep;
      h[i] = (std::exp(-a * a / (4.0 * t)) + std::exp(-c * c / (4.0 * t))) / std::sqrt(4.0 * M_PI * t);
    }
    f.h.push_back(std::move(h));
  }
  return f;
}

LyhEvaluation trace_harnack_ricci(const Trajectory& traj, const Point& z, double t, const VectorFieldV& V) {
  return make_eval(quadratic_trace_ricci(traj, z, t), LyhKind::TraceRicci, z, V);
}

LyhEvaluation trace_harnack_kahler(const Trajectory& traj, const Point& z, double t, const VectorFieldV& V) {
  return make_eval(quadratic_trace_kahler(traj, z, t), LyhKind::TraceKahler, z, V);
}

LyhEvaluation linear_trace_Z(const Trajectory& traj, const Point& z, double t, const VectorFieldV& V) {
  return make_eval(quadratic_linear_Z(traj, z, t), LyhKind::LinearZ, z, V);
}

LyhEvaluation linear_trace_Q(const Trajectory& traj, const Point& z, double t, const VectorFieldV& V) {
  return make_eval(quadratic_linear_Q(traj, z, t), LyhKind::LinearQ, z, V);
}

LyhEvaluation linear_trace_Q(const LineField& line, double x, double t, const VectorFieldV& V) {
  return make_eval(quadratic_linear_Q(line, x, t), LyhKind::LinearQ, Point{cplx(x, 0.0)}, V);
}

LyhEvaluation linear_trace_Q_constant(const Eigen::MatrixXd& h, const Eigen::VectorXd& V, double t) {
  check_t(t);
  if (h.rows() != h.cols() || h.rows() != V.size()) throw InputError("constant Q: dimension mismatch");
  LyhQuadratic q = zero_quadratic(static_cast<int>(h.rows()), t);
  q.A = h.cast<cplx>();
  q.trace_h = h.trace();
  q.a_scale = h.cwiseAbs().maxCoeff();
  q.inv_t_weight = 0.5;
  q.c = 0.5 * q.trace_h / t;
  VectorFieldV v;
  for (Eigen::Index i = 0; i < V.size(); ++i) v.v.emplace_back(V(i), 0.0);
  return make_eval(q, LyhKind::LinearQ, Point(h.rows(), cplx(0.0)), v);
}

LyhEvaluation bundle_trace_lyh(const Trajectory& traj, const Point& x, double t, const VectorFieldV& V) {
  return make_eval(quadratic_bundle_trace(traj, x, t), LyhKind::BundleTrace, x, V);
}

Minimizer minimize_quadratic(const LyhQuadratic& q, LyhKind kind, const Point& point) {
  const Eigen::Index m = q.b.size();
  const Eigen::MatrixXcd A = 0.5 * (q.A + q.A.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(A);
  const auto& lam = es.eigenvalues();
  const double norm = lam.cwiseAbs().maxCoeff();
  const double trace = A.trace().real();
  if (lam(0) < -1e-8 * std::max(1.0, norm)) {
    throw InputError("minimize_V: h has eigenvalue " + std::to_string(lam(0)) + " (quantity unbounded below)");
  }
  const double eps0 = std::max(1e-12 * norm, 1e-9 * q.a_scale);
  bool regularized = false;
  Eigen::VectorXd shifted = lam;
  if (!(lam(0) > eps0) || !(lam(0) > 0.0)) {
    const double eps = std::max({eps0, 1e-8 * trace, 1e-300});
    shifted = lam.array().max(0.0) + eps;
    regularized = true;
  }
  // A V = -conj(b)
  const Eigen::VectorXcd rhs = -es.eigenvectors().adjoint() * q.b.conjugate();
  const Eigen::VectorXcd v = es.eigenvectors() * (rhs.array() / shifted.array().cast<cplx>()).matrix();
  Minimizer out;
  out.v.v.assign(v.data(), v.data() + m);
  out.eval = make_eval(q, kind, point, out.v);
  out.eval.minimized = true;
  out.eval.regularized = regularized;

  // Certification against seeded random probes, on the quadratic actually solved.
  LyhQuadratic solved = q;
  solved.A = es.eigenvectors() * shifted.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
  const double base = solved.value(out.v);
  std::mt19937_64 rng(0x4c5948u);
  std::normal_distribution<double> N(0.0, 1.0);
  const double vn = v.norm();
  const double scale = std::fabs(q.c) + std::fabs(out.eval.value) + q.b.norm() * vn + shifted.cwiseAbs().maxCoeff() * vn * vn + 1e-300;
  bool ok = true;
  for (int p = 0; p < 100; ++p) {
    VectorFieldV probe = out.v;
    for (auto& c : probe.v) c += (1.0 + vn) * cplx(N(rng), N(rng));
    if (solved.value(probe) < base - 1e-11 * scale) ok = false;
  }
  out.eval.certified = ok;
  return out;
}

Minimizer minimize_V(const Trajectory& traj, LyhKind kind, const Point& point, double t) {
  switch (kind) {
    case LyhKind::TraceRicci: return minimize_quadratic(quadratic_trace_ricci(traj, point, t), kind, point);
    case LyhKind::TraceKahler: return minimize_quadratic(quadratic_trace_kahler(traj, point, t), kind, point);
    case LyhKind::LinearZ: return minimize_quadratic(quadratic_linear_Z(traj, point, t), kind, point);
    case LyhKind::LinearQ: return minimize_quadratic(quadratic_linear_Q(traj, point, t), kind, point);
    case LyhKind::BundleTrace: return minimize_quadratic(quadratic_bundle_trace(traj, point, t), kind, point);
  }
  throw InputError("unknown LYH kind");
}

namespace {

LyhQuadratic radial_quad(RadialEvaluator& ev, LyhKind kind, const Point& z, double t) {
  switch (kind) {
    case LyhKind::TraceRicci: return quad_trace(ev, z, t, true);
    case LyhKind::TraceKahler: return quad_trace(ev, z, t, false);
    case LyhKind::LinearZ: return quad_linear(ev, z, t, false);
    case LyhKind::LinearQ: return quad_linear(ev, z, t, true);
    default: throw InputError("not a radial LYH kind");
  }
}

RadialVectorField field_from(RadialEvaluator& ev, LyhKind kind, double t) {
  const auto& grid = ev.traj().states.front().metric.grid;
  if (ev.traj().states.front().metric.m != 1) throw InputError("minimizing field: m = 1 only");
  RadialVectorField f{grid, std::vector<double>(grid.n, 0.0)};
  for (int i = 0; i < grid.n; ++i) {
    const double r = std::sqrt(grid.rho(i));
    const auto q = radial_quad(ev, kind, Point{cplx(r, 0.0)}, t);
    const double A = q.A(0, 0).real();
    // b = zbar X for every radial kind, so V* = -z X / A.
    f.phi[i] = A > 0.0 ? -q.b(0).real() / (r * A) : 0.0;
  }
  return f;
}

SolitonResiduals residuals_from(RadialEvaluator& ev, const Point& z, double t, const RadialVectorField& V,
                                bool ancient) {
  check_t(t);
  const std::size_t k = ev.index(t);
  const auto& s = ev.snap(k);
  if (s.m != 1) throw InputError("soliton residuals: m = 1 only");
  if (!V.grid.same_as(*s.grid)) throw InputError("vector field not on the trajectory grid");
  const double tk = s.flow == MetricFlow::Real ? 2.0 * t : t;  // Kahler time
  const double inv_t = ancient ? 0.0 : 1.0 / tk;
  const auto& grid = *s.grid;
  const int n = grid.n;
  const Differentiator D(grid);
  std::vector<double> q(n);
  for (int i = 0; i < n; ++i) q[i] = grid.rho(i) * s.b[i] * V.phi[i];
  const auto qs = D.d1(q), phis = D.d1(V.phi);
  std::vector<double> r45(n), r46(n);
  for (int i = 0; i < n; ++i) {
    // grad_z V_zbar = d_rho(rho b phi); grad_zbar V_zbar = z^2 b phi_rho.
    r45[i] = qs[i] / (grid.rho(i) * s.b[i]) - s.R[i] - inv_t;
    r46[i] = std::fabs(phis[i]);
  }
  const double rho = rho_of(z);
  SolitonResiduals out;
  out.soliton_eq = std::fabs(s.at(r45, rho));
  out.holomorphy = std::fabs(s.at(r46, rho));
  const double H = s.has_h ? s.at(s.H, rho) : s.at(s.R, rho);
  const double R = s.at(s.R, rho), phi = s.at(V.phi, rho), b = s.at(s.b, rho);
  const double bracket = s.at(s.lapR, rho) + R * R + 2.0 * rho * s.at(s.Rrho, rho) * phi + R * b * rho * phi * phi +
                         R * inv_t;
  out.y1 = std::fabs(H * bracket);
  out.y2 = std::fabs(H) * (out.soliton_eq * out.soliton_eq + out.holomorphy * out.holomorphy);
  return out;
}

}  // namespace

RadialVectorField minimizing_field(const Trajectory& traj, LyhKind kind, double t) {
  RadialEvaluator ev(traj);
  return field_from(ev, kind, t);
}

SolitonResiduals soliton_residuals(const Trajectory& traj, const Point& z, double t, const RadialVectorField& V,
                                   bool ancient) {
  RadialEvaluator ev(traj);
  return residuals_from(ev, z, t, V, ancient);
}

ScanReport lyh_scan(const Trajectory& traj, LyhKind kind, const std::vector<double>& times, const ScanRegion& region,
                    bool ancient) {
  if (times.empty()) throw InputError("lyh_scan: no times");
  if (region.stride < 1) throw InputError("lyh_scan: stride must be >= 1");
  ScanReport rep;
  rep.kind = kind;
  rep.ancient = ancient;
  rep.min_value = HUGE_VAL;

  auto consider = [&](const Minimizer& mz, double t) {
    const double v = ancient ? mz.eval.ancient_value : mz.eval.value;
    rep.samples.push_back({t, mz.eval.point, mz.eval.value, mz.eval.ancient_value});
    ++rep.evaluations;
    rep.all_certified = rep.all_certified && mz.eval.certified;
    if (v < rep.min_value) {
      rep.min_value = v;
      rep.argmin = mz.eval.point;
      rep.argmin_t = t;
    }
  };

  if (kind == LyhKind::BundleTrace) {
    TorusEvaluator ev(traj);
    for (double t : times) {
      const auto& B = *traj.states[traj.index_of(t)].bundle;
      const double h = B.spacing();
      for (int j = 0; j < B.n; j += region.stride)
        for (int i = 0; i < B.n; i += region.stride) {
          const Point x{cplx(i * h, j * h)};
          consider(minimize_quadratic(ev.quad(x, t), kind, x), t);
        }
    }
  } else {
    RadialEvaluator ev(traj);
    const auto& grid = traj.states.front().metric.grid;
    const int m = traj.states.front().metric.m;
    for (double t : times) {
      for (int i = 0; i < grid.n; i += region.stride) {
        const double rho = grid.rho(i);
        if (rho < region.rho_min || rho > region.rho_max) continue;
        Point z(m, cplx(0.0));
        z[0] = cplx(std::sqrt(rho), 0.0);
        consider(minimize_quadratic(radial_quad(ev, kind, z, t), kind, z), t);
      }
    }
    if (rep.evaluations > 0 && m == 1) {
      const auto field = field_from(ev, kind, rep.argmin_t);
      rep.residuals = residuals_from(ev, rep.argmin, rep.argmin_t, field, ancient);
      rep.residuals_available = true;
    }
  }
  if (rep.evaluations == 0) throw InputError("lyh_scan: empty region");
  return rep;
}

}  // namespace klab
