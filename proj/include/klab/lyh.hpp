#pragma once
// Li-Yau-Hamilton quantities along trajectories: trace Harnack (real and
// Kahler), linear traces Z and Q of a tensor h, the bundle trace on the
// torus, their minimization over V, and the soliton residuals at a point.
//
// Radial evaluations are for m = 1 (any m on flat metrics with h = c g).
// Points are z in C (radial kinds; only |z|^2 matters, the phase rotates V)
// or x + iy on the torus [0, 2pi)^2. Real kinds pack a tangent vector
// (V^x, V^y) as V^x + i V^y; the line fixture uses the real part only.

#include <optional>
#include <string>
#include <vector>

#include "klab/flow.hpp"
#include "klab/hermitian.hpp"

namespace klab {

enum class LyhKind { TraceRicci, TraceKahler, LinearZ, LinearQ, BundleTrace };

const char* to_string(LyhKind k);
LyhKind lyh_kind_from_string(const std::string& s);
bool is_real_kind(LyhKind k);

// V^alpha at a point; lowering with a diagonal metric g_{alpha alpha-bar}.
struct VectorFieldV {
  std::vector<cplx> v;

  std::vector<cplx> lowered(const std::vector<double>& g) const;  // V_{alpha-bar}
  static VectorFieldV raised(const std::vector<cplx>& low, const std::vector<double>& g);
};

struct LyhEvaluation {
  LyhKind kind = LyhKind::TraceKahler;
  Point point;
  double t = 0.0;
  double value = 0.0;
  double ancient_value = 0.0;  // value without the 1/t term
  double trace_h = 0.0;        // H (or R, Omega for the trace kinds)
  VectorFieldV v_used;
  bool minimized = false;
  bool regularized = false;
  bool certified = false;   // V* beat every random probe
  bool one_sided = false;   // time derivative taken at a trajectory end
};

// Radial field V^z = phi(rho) z on the trajectory grid.
struct RadialVectorField {
  RadialGrid grid;
  std::vector<double> phi;

  VectorFieldV at(const Point& z) const;
};

struct SolitonResiduals {
  double y1 = 0.0;
  double y2 = 0.0;
  double soliton_eq = 0.0;
  double holomorphy = 0.0;
};

// Value c + 2 Re(b . V) + V^H A V of a quantity at one point.
struct LyhQuadratic {
  double c = 0.0;
  Eigen::VectorXcd b;
  Eigen::MatrixXcd A;
  double trace_h = 0.0;
  double inv_t_weight = 1.0;  // coefficient of trace_h / t inside c
  double t = 1.0;
  bool one_sided = false;
  double a_scale = 0.0;  // largest |A| over the snapshot; sets the singular floor

  double value(const VectorFieldV& V) const;
};

// Line fixtures for Q in real dimension one: h(x, t) on a uniform grid.
struct LineField {
  std::vector<double> x;
  std::vector<double> times;
  std::vector<std::vector<double>> h;  // h[k][i] at times[k], x[i]

  // h = w, w = (4 pi t)^{-1/2} e^{-x^2/4t}: Hess of u with u_xx = w.
  static LineField heat_kernel(const std::vector<double>& times, double half_width = 8.0, int n = 2001);
  // Sum of two kernels centred at -+sep/2.
  static LineField two_kernels(const std::vector<double>& times, double sep, double half_width = 12.0,
                               int n = 2401);
};

LyhQuadratic quadratic_trace_ricci(const Trajectory& traj, const Point& z, double t);
LyhQuadratic quadratic_trace_kahler(const Trajectory& traj, const Point& z, double t);
LyhQuadratic quadratic_linear_Z(const Trajectory& traj, const Point& z, double t);
LyhQuadratic quadratic_linear_Q(const Trajectory& traj, const Point& z, double t);
LyhQuadratic quadratic_linear_Q(const LineField& line, double x, double t);
LyhQuadratic quadratic_bundle_trace(const Trajectory& traj, const Point& x, double t);

LyhEvaluation trace_harnack_ricci(const Trajectory& traj, const Point& z, double t, const VectorFieldV& V);
LyhEvaluation trace_harnack_kahler(const Trajectory& traj, const Point& z, double t, const VectorFieldV& V);
LyhEvaluation linear_trace_Z(const Trajectory& traj, const Point& z, double t, const VectorFieldV& V);
LyhEvaluation linear_trace_Q(const Trajectory& traj, const Point& z, double t, const VectorFieldV& V);
LyhEvaluation linear_trace_Q(const LineField& line, double x, double t, const VectorFieldV& V);
// Flat R^n with a constant tensor: h(V, V) + tr(h) / (2t).
LyhEvaluation linear_trace_Q_constant(const Eigen::MatrixXd& h, const Eigen::VectorXd& V, double t);
LyhEvaluation bundle_trace_lyh(const Trajectory& traj, const Point& x, double t, const VectorFieldV& V);

struct Minimizer {
  VectorFieldV v;
  LyhEvaluation eval;
};

// Closed-form minimizer A V* = -conj(b), certified against 100 seeded random
// probes. A with smallest eigenvalue below 1e-9 a_scale is treated as
// near-singular: Tikhonov-regularized and flagged. An eigenvalue
// below -1e-8 (unbounded below) throws InputError.
Minimizer minimize_quadratic(const LyhQuadratic& q, LyhKind kind, const Point& point);
Minimizer minimize_V(const Trajectory& traj, LyhKind kind, const Point& point, double t);

// Minimizing field V^z = phi(rho) z over the whole grid at snapshot time t.
RadialVectorField minimizing_field(const Trajectory& traj, LyhKind kind, double t);

// Soliton-equation (R + g/t = grad V) and holomorphy (nabla V = 0) residuals of V and the Y1, Y2 contractions at z (orthonormal
// frame norms); `ancient` drops every 1/t term. H is taken from the tensor
// field, or from R when the trajectory carries none.
SolitonResiduals soliton_residuals(const Trajectory& traj, const Point& z, double t, const RadialVectorField& V,
                                   bool ancient = false);

struct ScanRegion {
  double rho_min = 1e-4;
  double rho_max = 1e2;
  int stride = 1;  // grid nodes (radial) or torus nodes per axis
};

struct ScanSample {
  double t;
  Point point;
  double value;
  double ancient_value;
};

struct ScanReport {
  LyhKind kind = LyhKind::TraceKahler;
  bool ancient = false;
  double min_value = 0.0;
  Point argmin;
  double argmin_t = 0.0;
  SolitonResiduals residuals;  // at the argmin (radial kinds)
  bool residuals_available = false;
  std::size_t evaluations = 0;
  bool all_certified = true;
  std::vector<ScanSample> samples;
};

// Minimized quantity over snapshot times x region; the minimum is of the
// ancient variant when `ancient` is set.
ScanReport lyh_scan(const Trajectory& traj, LyhKind kind, const std::vector<double>& times,
                    const ScanRegion& region, bool ancient = false);

}  // namespace klab
