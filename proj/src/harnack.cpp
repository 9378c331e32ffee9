#include "klab/harnack.hpp"

#include <Eigen/Sparse>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "klab/errors.hpp"

namespace klab {

namespace {

double norm(const RealPoint& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

std::uint64_t ipow(int b, int e) {
  std::uint64_t r = 1;
  for (int k = 0; k < e; ++k) r *= static_cast<std::uint64_t>(b);
  return r;
}

double ball_volume(int m, double R) {
  double v = std::pow(M_PI, m) * std::pow(R, 2 * m);
  for (int k = 2; k <= m; ++k) v /= k;
  return v;
}

// Central second differences; the diagonal uses step 2 delta so every entry
// shares the same node set.
Eigen::MatrixXd real_hessian(const RealFunction& u, const RealPoint& x, double delta) {
  const int d = static_cast<int>(x.size());
  Eigen::MatrixXd H(d, d);
  RealPoint p = x;
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      auto at = [&](double si, double sj) {
        p = x;
        p[i] += si * delta;
        p[j] += sj * delta;
        return u(p);
      };
      H(i, j) = H(j, i) = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * delta * delta);
    }
  return H;
}

Eigen::VectorXd gradient(const RealFunction& u, const RealPoint& x, double delta) {
  const int d = static_cast<int>(x.size());
  Eigen::VectorXd g(d);
  RealPoint p = x;
  for (int i = 0; i < d; ++i) {
    p[i] = x[i] + delta;
    const double up = u(p);
    p[i] = x[i] - delta;
    g(i) = (up - u(p)) / (2.0 * delta);
    p[i] = x[i];
  }
  return g;
}

// phi(x) = x + R^2 grad u(x)
Eigen::VectorXd phi(const RealFunction& u, double R, const RealPoint& x, double delta) {
  Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
  return v + R * R * gradient(u, x, delta);
}

bool diagonally_dominant(const Eigen::MatrixXd& A) {
  for (int i = 0; i < A.rows(); ++i) {
    double off = 0.0;
    for (int j = 0; j < A.cols(); ++j)
      if (j != i) off += std::fabs(A(i, j));
    if (A(i, i) < off * (1.0 + 1e-14)) return false;
  }
  return true;
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double pos = q * (v.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - lo) * (v[hi] - v[lo]);
}

}  // namespace

BoxGrid::BoxGrid(int m_, int n_, double half_width_) : m(m_), n(n_), half_width(half_width_) {
  if (m < 1 || m > 2) throw InputError("box grid: m must be 1 or 2");
  if (n < 3) throw InputError("box grid: need at least 3 nodes per axis");
  if (!(half_width > 0.0)) throw InputError("box grid: half width must be positive");
}

std::size_t BoxGrid::size() const { return ipow(n, dim()); }

std::vector<int> BoxGrid::index(std::size_t node) const {
  std::vector<int> idx(dim());
  for (int k = 0; k < dim(); ++k) {
    idx[k] = static_cast<int>(node % n);
    node /= n;
  }
  return idx;
}

std::size_t BoxGrid::node(const std::vector<int>& idx) const {
  std::size_t r = 0;
  for (int k = dim() - 1; k >= 0; --k) r = r * n + idx[k];
  return r;
}

RealPoint BoxGrid::point(std::size_t node_) const {
  const auto idx = index(node_);
  RealPoint x(dim());
  for (int k = 0; k < dim(); ++k) x[k] = coord(idx[k]);
  return x;
}

std::size_t BoxGrid::nearest(const RealPoint& x) const {
  std::vector<int> idx(dim());
  for (int k = 0; k < dim(); ++k) {
    const long i = std::lround((x[k] + half_width) / h());
    idx[k] = static_cast<int>(std::clamp<long>(i, 0, n - 1));
  }
  return node(idx);
}

bool BoxGrid::on_box_boundary(std::size_t node_) const {
  for (int i : index(node_))
    if (i == 0 || i == n - 1) return true;
  return false;
}

Eigen::MatrixXd real_coefficients(const HermitianMatrix& a) {
  const int m = a.dim();
  Eigen::MatrixXd A(2 * m, 2 * m);
  for (int p = 0; p < m; ++p)
    for (int q = 0; q < m; ++q) {
      const double P = a(p, q).real(), Q = a(p, q).imag();
      A(2 * p, 2 * q) = 0.25 * P;
      A(2 * p + 1, 2 * q + 1) = 0.25 * P;
      A(2 * p, 2 * q + 1) = -0.25 * Q;
      A(2 * p + 1, 2 * q) = 0.25 * Q;
    }
  return A;
}

CoefficientField CoefficientField::constant(const BoxGrid& grid, const HermitianMatrix& a) {
  if (a.dim() != grid.m) throw InputError("coefficient field: matrix size must equal m");
  const auto ev = eigenvalues(a);
  CoefficientField f;
  f.grid = grid;
  f.bounds = SpectrumBounds(ev(0), ev(ev.size() - 1));
  f.a.assign(grid.size(), a);
  return f;
}

CoefficientField CoefficientField::identity(const BoxGrid& grid) {
  return constant(grid, HermitianMatrix::identity(grid.m));
}

CoefficientField CoefficientField::random(const BoxGrid& grid, double lambda, double Lambda, std::uint64_t seed) {
  CoefficientField f;
  f.grid = grid;
  f.bounds = SpectrumBounds(lambda, Lambda);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(lambda, Lambda);
  std::normal_distribution<double> N(0.0, 1.0);
  f.a.reserve(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (grid.m == 1) {
      f.a.push_back(HermitianMatrix::diagonal(Eigen::VectorXd::Constant(1, U(rng))));
      continue;
    }
    for (int attempt = 0;; ++attempt) {
      if (attempt > 1000) throw InputError("coefficient field: no monotone draw for these bounds");
      Eigen::MatrixXcd G(grid.m, grid.m);
      for (int i = 0; i < grid.m; ++i)
        for (int j = 0; j < grid.m; ++j) G(i, j) = cplx(N(rng), N(rng));
      const Eigen::MatrixXcd Q = Eigen::HouseholderQR<Eigen::MatrixXcd>(G).householderQ();
      Eigen::VectorXd ev(grid.m);
      for (int i = 0; i < grid.m; ++i) ev(i) = U(rng);
      const Eigen::MatrixXcd M = Q * ev.cast<cplx>().asDiagonal() * Q.adjoint();
      HermitianMatrix a(0.5 * (M + M.adjoint()));
      if (diagonally_dominant(real_coefficients(a))) {
        f.a.push_back(std::move(a));
        break;
      }
    }
  }
  return f;
}

EllipticSolve solve_nondivergence(const CoefficientField& field, const RealFunction& f, const RealFunction& boundary,
                                  double domain_radius, double tol) {
  const auto& grid = field.grid;
  if (field.a.size() != grid.size()) throw InputError("solve: field does not match its grid");
  if (!(domain_radius > 0.0) || domain_radius > grid.half_width) throw InputError("solve: domain must fit the box");
  const int d = grid.dim();
  const double h2 = grid.h() * grid.h();
  EllipticSolve out;
  out.grid = grid;
  out.domain_radius = domain_radius;
  out.u.assign(grid.size(), 0.0);
  out.interior.assign(grid.size(), 0);
  std::vector<long> unknown(grid.size(), -1);
  long count = 0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto x = grid.point(k);
    if (norm(x) < domain_radius && !grid.on_box_boundary(k)) {
      out.interior[k] = 1;
      unknown[k] = count++;
    } else {
      out.u[k] = boundary(x);
    }
  }
  if (count == 0) throw InputError("solve: no interior nodes");

  // Stencil weights per interior node: (neighbour, weight), centre included.
  auto stencil = [&](std::size_t k, std::vector<std::pair<std::size_t, double>>& w) {
    w.clear();
    const Eigen::MatrixXd A = real_coefficients(field.a[k]);
    const auto idx = grid.index(k);
    auto shift = [&](int i, int si, int j, int sj) {
      auto v = idx;
      v[i] += si;
      if (j >= 0) v[j] += sj;
      return grid.node(v);
    };
    double centre = 0.0;
    for (int i = 0; i < d; ++i) {
      w.emplace_back(shift(i, 1, -1, 0), A(i, i) / h2);
      w.emplace_back(shift(i, -1, -1, 0), A(i, i) / h2);
      centre -= 2.0 * A(i, i) / h2;
    }
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j) {
        const double c = A(i, j);
        if (c == 0.0) continue;
        const double s = c > 0.0 ? 1.0 : -1.0, a = std::fabs(c) / h2;
        w.emplace_back(shift(i, 1, j, static_cast<int>(s)), a);
        w.emplace_back(shift(i, -1, j, -static_cast<int>(s)), a);
        w.emplace_back(shift(i, 1, -1, 0), -a);
        w.emplace_back(shift(i, -1, -1, 0), -a);
        w.emplace_back(shift(j, 1, -1, 0), -a);
        w.emplace_back(shift(j, -1, -1, 0), -a);
        centre += 2.0 * a;
      }
    w.emplace_back(k, centre);
  };

  std::vector<Eigen::Triplet<double>> trips;
  Eigen::VectorXd rhs(count);
  std::vector<std::pair<std::size_t, double>> w;
  std::vector<double> fval(grid.size(), 0.0);
  out.monotone = true;
  long bad = -1;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!out.interior[k]) continue;
    stencil(k, w);
    // Merge duplicate neighbours before checking signs.
    std::sort(w.begin(), w.end());
    std::vector<std::pair<std::size_t, double>> merged;
    for (const auto& e : w) {
      if (!merged.empty() && merged.back().first == e.first) merged.back().second += e.second;
      else merged.push_back(e);
    }
    const long row = unknown[k];
    fval[k] = f(grid.point(k));
    double b = fval[k];
    double centre = 0.0;
    for (const auto& [nb, wt] : merged)
      if (nb == k) centre = std::fabs(wt);
    for (const auto& [nb, wt] : merged) {
      if (nb != k && wt < -1e-12 * centre) {
        out.monotone = false;
        bad = static_cast<long>(k);
      }
      if (unknown[nb] >= 0) trips.emplace_back(row, unknown[nb], wt);
      else b -= wt * out.u[nb];
    }
    rhs(row) = b;
  }
  if (!out.monotone) {
    const auto x = grid.point(static_cast<std::size_t>(bad));
    std::string at;
    for (double v : x) at += (at.empty() ? "" : ", ") + std::to_string(v);
    throw InputError("solve: coefficient field is not diagonally dominant at (" + at +
                     "); the stencil has no discrete maximum principle");
  }
  Eigen::SparseMatrix<double> M(count, count);
  M.setFromTriplets(trips.begin(), trips.end());
  M.makeCompressed();
  Eigen::VectorXd sol;
  if (d == 2) {
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(M);
    if (lu.info() != Eigen::Success) throw NumericalError("solve: sparse factorization failed");
    sol = lu.solve(rhs);
  } else {
    // direct factorization fills in badly in four dimensions
    Eigen::BiCGSTAB<Eigen::SparseMatrix<double>> it;
    it.setTolerance(1e-14);
    it.setMaxIterations(5000);
    it.compute(M);
    sol = it.solve(rhs);
    if (it.info() != Eigen::Success && it.error() > 1e-12) throw NumericalError("solve: iteration did not converge");
  }
  for (std::size_t k = 0; k < grid.size(); ++k)
    if (unknown[k] >= 0) out.u[k] = sol(unknown[k]);

  out.residual = 0.0;
  out.min_interior = HUGE_VAL;
  out.max_interior = -HUGE_VAL;
  double scale = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!out.interior[k]) continue;
    stencil(k, w);
    double r = -fval[k], mag = std::fabs(fval[k]);
    for (const auto& [nb, wt] : w) {
      r += wt * out.u[nb];
      mag += std::fabs(wt * out.u[nb]);
    }
    out.residual = std::max(out.residual, std::fabs(r));
    scale = std::max(scale, mag);
    out.min_interior = std::min(out.min_interior, out.u[k]);
    out.max_interior = std::max(out.max_interior, out.u[k]);
  }
  if (out.residual > tol * std::max(1.0, scale)) throw NumericalError("solve: residual above tolerance");
  bool homogeneous = true;
  for (std::size_t k = 0; k < grid.size(); ++k)
    homogeneous = homogeneous && (out.interior[k] ? fval[k] == 0.0 : out.u[k] >= 0.0);
  if (homogeneous && out.min_interior < -1e-12) throw NumericalError("solve: discrete maximum principle violated");
  return out;
}

BallExtremes ball_extremes(const EllipticSolve& solve, double R) {
  BallExtremes e;
  e.sup = -HUGE_VAL;
  e.inf = HUGE_VAL;
  for (std::size_t k = 0; k < solve.grid.size(); ++k) {
    if (norm(solve.grid.point(k)) > R * (1.0 + 1e-12)) continue;
    e.sup = std::max(e.sup, solve.u[k]);
    e.inf = std::min(e.inf, solve.u[k]);
  }
  if (!(e.sup >= e.inf)) throw InputError("ball extremes: no grid nodes in the ball");
  e.ratio = e.inf > 0.0 ? e.sup / e.inf : HUGE_VAL;
  return e;
}

ProbeStats harnack_ratio_probe(const ProbeConfig& c) {
  if (c.trials < 1 || !(c.R > 0.0) || c.modes < 0) throw InputError("probe: bad configuration");
  const BoxGrid grid(c.m, c.n, 2.0 * c.R);
  ProbeStats st;
  st.seed = c.seed;
  st.lambda = c.lambda;
  st.Lambda = c.Lambda;
  st.m = c.m;
  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::normal_distribution<double> N(0.0, 1.0);
  for (int t = 0; t < c.trials; ++t) {
    const auto field = CoefficientField::random(grid, c.lambda, c.Lambda, rng());
    // c0 + sum r_k cos(k pi (w_k . x) / (2R) + p_k) with c0 > sum r_k
    struct Mode {
      double r, p;
      RealPoint w;
    };
    std::vector<Mode> modes;
    double total = 0.0;
    for (int k = 1; k <= c.modes; ++k) {
      Mode md{U(rng) / k, 2.0 * M_PI * U(rng), RealPoint(grid.dim())};
      double nw = 0.0;
      for (auto& v : md.w) {
        v = N(rng);
        nw += v * v;
      }
      for (auto& v : md.w) v /= std::sqrt(nw);
      total += md.r;
      modes.push_back(std::move(md));
    }
    const double c0 = total * (1.0 + 0.05 + U(rng)) + 1e-3;
    auto g = [&](const RealPoint& x) {
      double v = c0;
      for (std::size_t k = 0; k < modes.size(); ++k) {
        double dot = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) dot += modes[k].w[i] * x[i];
        v += modes[k].r * std::cos((k + 1) * M_PI * dot / (2.0 * c.R) + modes[k].p);
      }
      return v;
    };
    try {
      const auto s = solve_nondivergence(field, [](const RealPoint&) { return 0.0; }, g, 2.0 * c.R);
      const auto e = ball_extremes(s, c.R);
      if (!(e.inf > 0.0) || !std::isfinite(e.ratio)) {
        ++st.discarded;
        continue;
      }
      st.ratios.push_back(e.ratio);
    } catch (const NumericalError&) {
      ++st.discarded;
    }
  }
  st.q50 = quantile(st.ratios, 0.5);
  st.q90 = quantile(st.ratios, 0.9);
  st.max = st.ratios.empty() ? 0.0 : *std::max_element(st.ratios.begin(), st.ratios.end());
  return st;
}

VolumeInequality volume_inequality_eval(const RealFunction& u, const CoefficientField& field, double R, double tol) {
  const auto& grid = field.grid;
  if (!(R > 0.0)) throw InputError("volume: R must be positive");
  if (grid.half_width < 7.0 * R * (1.0 - 1e-12)) throw InputError("volume: the grid must cover B(7R)");
  const int m = grid.m;
  const double delta = 1e-3 * R, lam = field.bounds.lambda, Lam = field.bounds.Lambda;
  double inf2 = HUGE_VAL, sum = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto x = grid.point(k);
    const double r = norm(x);
    if (r >= 7.0 * R) continue;
    const double v = u(x);
    if (r >= 5.0 * R && v < 0.0) throw InputError("volume: u < 0 on the annulus B(7R) \\ B(5R)");
    if (r < 2.0 * R) inf2 = std::min(inf2, v);
    if (r < 5.0 * R && v <= 6.0) {
      const double Lu = (real_coefficients(field.a[k]) * real_hessian(u, x, delta)).trace();
      const double g = std::max(0.0, R * R * Lu / (2.0 * m) + Lam / 4.0);
      sum += std::pow(g, 2 * m);
    }
  }
  if (!(inf2 <= 1.0)) throw InputError("volume: inf of u over B(2R) exceeds 1");
  VolumeInequality res;
  res.lhs = ball_volume(m, R);
  res.rhs = std::pow(32.0, m) / std::pow(lam, 2 * m) * sum * std::pow(grid.h(), 2 * m);
  res.holds = res.lhs <= res.rhs * (1.0 + tol);
  return res;
}

ContactSetReport contact_set_construct(const RealFunction& u, double R, const BoxGrid& grid, int y_stride) {
  if (!(R > 0.0) || y_stride < 1) throw InputError("contact set: bad parameters");
  if (grid.half_width < 7.0 * R * (1.0 - 1e-12)) throw InputError("contact set: the grid must cover B(7R)");
  const int d = grid.dim();
  const double h = grid.h();
  std::vector<std::size_t> big;
  std::vector<double> uval;
  double inf2 = HUGE_VAL;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto x = grid.point(k);
    const double r = norm(x);
    if (r > 7.0 * R * (1.0 + 1e-12)) continue;
    const double v = u(x);
    if (r >= 5.0 * R && v < 0.0) throw InputError("contact set: u < 0 on the annulus B(7R) \\ B(5R)");
    if (r < 2.0 * R) inf2 = std::min(inf2, v);
    big.push_back(k);
    uval.push_back(v);
  }
  if (!(inf2 <= 1.0)) throw InputError("contact set: inf of u over B(2R) exceeds 1");

  ContactSetReport rep;
  rep.h = h;
  rep.inside_5R = rep.below_6 = rep.covers = true;
  const int centre = (grid.n - 1) / 2;
  std::set<std::size_t> E;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto y = grid.point(k);
    if (norm(y) >= R) continue;
    bool on_mesh = true;
    for (int i : grid.index(k)) on_mesh = on_mesh && (i - centre) % y_stride == 0;
    if (!on_mesh) continue;
    std::size_t best = 0;
    double wmin = HUGE_VAL;
    for (std::size_t j = 0; j < big.size(); ++j) {
      const auto x = grid.point(big[j]);
      double d2 = 0.0;
      for (int i = 0; i < d; ++i) d2 += (x[i] - y[i]) * (x[i] - y[i]);
      const double w = R * R * uval[j] + 0.5 * d2;
      if (w < wmin) {
        wmin = w;
        best = j;
      }
    }
    ContactPoint cp;
    cp.y = y;
    cp.x = grid.point(big[best]);
    cp.u = uval[best];
    const auto ph = phi(u, R, cp.x, 1e-3 * R);
    double miss = 0.0;
    for (int i = 0; i < d; ++i) miss += (ph(i) - y[i]) * (ph(i) - y[i]);
    cp.miss = std::sqrt(miss);
    const Eigen::MatrixXd Dphi =
        Eigen::MatrixXd::Identity(d, d) + R * R * real_hessian(u, cp.x, 1e-3 * R);
    const double cell = std::sqrt(static_cast<double>(d)) * h;
    const double slack = cell * std::max(1.0, Dphi.operatorNorm());
    rep.slack = std::max(rep.slack, slack);
    const double rx = norm(cp.x);
    if (rx > 5.0 * R + cell) rep.inside_5R = false;
    if (rx >= 7.0 * R - h) rep.boundary_hit = true;
    if (cp.u > 6.0) rep.below_6 = false;
    if (cp.miss > slack) rep.covers = false;
    rep.max_miss = std::max(rep.max_miss, cp.miss);
    E.insert(big[best]);
    rep.points.push_back(std::move(cp));
  }
  if (rep.points.empty()) throw InputError("contact set: no grid nodes inside B(R)");
  rep.contact_nodes.assign(E.begin(), E.end());
  return rep;
}

namespace {

std::vector<double> chain_values(const RealFunction& u, const HermitianMatrix& a, const SpectrumBounds& b, double R,
                                 const RealPoint& x, double delta, bool certify) {
  const int d = static_cast<int>(x.size()), m = d / 2;
  const Eigen::MatrixXd D2u = real_hessian(u, x, delta);
  const Eigen::MatrixXd D2w = R * R * D2u + Eigen::MatrixXd::Identity(d, d);
  if (certify) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(D2w);
    if (es.eigenvalues()(0) < -1e-8 * (1.0 + es.eigenvalues().cwiseAbs().maxCoeff()))
      throw InputError("chain: D^2 w is not PSD at the point; not a contact point");
  }
  // Jacobian of phi from differences of phi itself.
  Eigen::MatrixXd Dphi(d, d);
  RealPoint p = x;
  for (int j = 0; j < d; ++j) {
    p[j] = x[j] + delta;
    const Eigen::VectorXd hi = phi(u, R, p, delta);
    p[j] = x[j] - delta;
    Dphi.col(j) = (hi - phi(u, R, p, delta)) / (2.0 * delta);
    p[j] = x[j];
  }
  const double jac = std::fabs(Dphi.determinant());
  const double det_real = std::fabs(D2w.determinant());
  const auto wcc = complex_hessian_from_real(BlockSymmetricMatrix(0.5 * (D2w + D2w.transpose())));
  const double dc = std::fabs(det(wcc));
  const double da = std::fabs(det(a));
  const double eight = std::pow(8.0, m), lam2m = std::pow(b.lambda, 2 * m);
  double tr = 0.0;  // sum a^{a b-bar} w_{a b-bar}
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) tr += (a(i, j) * wcc(i, j)).real();
  const double Lu = (real_coefficients(a) * D2u).trace();
  return {jac,
          det_real,
          eight * dc * dc,
          eight / lam2m * dc * dc * da * da,
          eight / lam2m * std::pow(tr / m, 2 * m),
          eight / lam2m * std::pow(R * R * Lu / m + b.Lambda / 2.0, 2 * m),
          std::pow(32.0, m) / lam2m * std::pow(R * R * Lu / (2.0 * m) + b.Lambda / 4.0, 2 * m)};
}

}  // namespace

ChainLinks contact_chain_at(const RealFunction& u, const HermitianMatrix& a, const SpectrumBounds& bounds, double R,
                            const RealPoint& x, const RealPoint& y) {
  if (a.dim() * 2 != static_cast<int>(x.size()) || x.size() != y.size()) throw InputError("chain: dimension mismatch");
  const double delta = 1e-3 * R;
  ChainLinks out;
  out.values = chain_values(u, a, bounds, R, x, delta, true);
  const auto coarse = chain_values(u, a, bounds, R, x, 2.0 * delta, false);
  for (std::size_t k = 0; k + 1 < out.values.size(); ++k)
    out.slack.push_back(std::fabs(coarse[k] - out.values[k]) + std::fabs(coarse[k + 1] - out.values[k + 1]));
  return out;
}

ChainResult contact_determinant_chain(const RealFunction& u, const CoefficientField& field, double R,
                                      const ContactSetReport& E, double tol) {
  ChainResult res;
  res.link_max.assign(6, -HUGE_VAL);
  res.max_violation = -HUGE_VAL;
  bool ok = true;
  for (const auto& cp : E.points) {
    const auto links = contact_chain_at(u, field.at(cp.x), field.bounds, R, cp.x, cp.y);
    for (std::size_t k = 0; k + 1 < links.values.size(); ++k) {
      const double scale = std::max({std::fabs(links.values[k]), std::fabs(links.values[k + 1]), 1e-300});
      const double gap = (links.values[k] - links.values[k + 1]) / scale;
      res.link_max[k] = std::max(res.link_max[k], gap);
      res.max_violation = std::max(res.max_violation, gap);
      if (gap > tol + links.slack[k] / scale) ok = false;
    }
    ++res.points;
  }
  if (res.points == 0) throw InputError("chain: no contact points");
  res.holds = ok;
  return res;
}

RealFunction random_admissible_function(const BoxGrid& grid, double R, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::normal_distribution<double> N(0.0, 1.0);
  const int d = grid.dim();
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Eigen::MatrixXd G(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) G(i, j) = N(rng);
    const Eigen::MatrixXd Q = Eigen::HouseholderQR<Eigen::MatrixXd>(G).householderQ();
    Eigen::VectorXd s(d);
    for (int i = 0; i < d; ++i) s(i) = -0.01 + 0.31 * U(rng);
    const Eigen::MatrixXd S = Q * s.asDiagonal() * Q.transpose() / (R * R);
    Eigen::VectorXd p(d), k(d);
    for (int i = 0; i < d; ++i) {
      p(i) = N(rng);
      k(i) = N(rng) / R;
    }
    p *= R * std::pow(U(rng), 1.0 / d) / p.norm();
    const double gamma = 0.8 * U(rng), eps = 0.05 * U(rng), phase = 2.0 * M_PI * U(rng);
    RealFunction u = [=](const RealPoint& x) {
      Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(x.data(), d) - p;
      return gamma + v.dot(S * v) + eps * std::cos(k.dot(Eigen::Map<const Eigen::VectorXd>(x.data(), d)) + phase);
    };
    bool ok = true;
    double inf2 = HUGE_VAL;
    for (std::size_t n = 0; n < grid.size() && ok; ++n) {
      const auto x = grid.point(n);
      const double r = norm(x), v = u(x);
      if (r >= 5.0 * R && r < 7.0 * R * (1.0 + 1e-12) && v < 0.0) ok = false;
      if (r < 2.0 * R) inf2 = std::min(inf2, v);
    }
    if (ok && inf2 <= 1.0) return u;
  }
  throw InputError("no admissible test function drawn");
}

HarnackTrials harnack_random_trials(int m, int n, double R, double lambda, double Lambda, int trials,
                                    std::uint64_t seed, int y_stride) {
  if (trials < 1) throw InputError("harnack trials: need at least one trial");
  const BoxGrid grid(m, n, 7.0 * R);
  std::mt19937_64 rng(seed);
  HarnackTrials out;
  out.min_volume_margin = HUGE_VAL;
  out.max_chain_gap = -HUGE_VAL;
  for (int t = 0; t < trials; ++t) {
    const auto field = CoefficientField::random(grid, lambda, Lambda, rng());
    const auto u = random_admissible_function(grid, R, rng());
    const auto p = volume_inequality_eval(u, field, R);
    if (!p.holds) ++out.volume_violations;
    out.min_volume_margin = std::min(out.min_volume_margin, p.rhs / p.lhs);
    const auto E = contact_set_construct(u, R, grid, y_stride);
    out.coverage = out.coverage && E.covers && E.inside_5R && E.below_6;
    for (const auto& cp : E.points) {
      const auto links = contact_chain_at(u, field.at(cp.x), field.bounds, R, cp.x, cp.y);
      bool bad = false;
      for (std::size_t k = 0; k + 1 < links.values.size(); ++k) {
        const double scale = std::max({std::fabs(links.values[k]), std::fabs(links.values[k + 1]), 1e-300});
        const double gap = (links.values[k] - links.values[k + 1]) / scale;
        out.max_chain_gap = std::max(out.max_chain_gap, gap);
        if (gap > 1e-8 + links.slack[k] / scale) bad = true;
      }
      ++out.contact_points;
      if (bad) ++out.chain_violations;
    }
    ++out.trials;
  }
  return out;
}

}  // namespace klab
