#pragma once
// Time stepping of the coupled system: radial metric under the Kähler-Ricci
// or real Ricci flow, a scalar heat field, a Hermitian tensor under the
// Lichnerowicz-type heat equation, and a line-bundle potential on the flat
// torus under the Hermitian-Einstein flow.
//
// Radial fields use a theta-scheme (Crank-Nicolson by default) with
// three-point differences in s and Thomas solves; the metric equation is
// nonlinear and is closed by Picard iteration. Both ends carry Neumann
// conditions holding the initial s-slope.

#include <optional>
#include <string>
#include <vector>

#include "klab/geometry.hpp"

namespace klab {

struct SchemeParams {
  double dt = 1e-3;
  double theta = 0.5;
  double cfl_safety = 0.4;
  double dt_min = 1e-9;
  double picard_tol = 1e-13;
  int picard_max = 100;
};

enum class MetricFlow { Static, Kahler, Real };

const char* to_string(MetricFlow f);

// Hermitian 2-tensor h in the radial/spherical eigenbasis, stored as the
// eigenvalues of g^{-1}h. For m = 1 only `rad` is used and h_{z zbar} = rad * g.
struct TensorProfile {
  std::vector<double> rad;
  std::vector<double> sph;
  bool positive = false;

  // H = g^{a bbar} h_{a bbar}
  std::vector<double> trace(int m) const;
  double min_eigenvalue(int m) const;
};

// Line-bundle potential u = log(eta(t)/eta(0)) on the flat torus [0, 2pi)^2
// (m = 1, g = 1), with Omega(t) = Omega0 - Delta u and lambda = mean Omega0.
struct TorusBundle {
  int n = 64;
  std::vector<double> u;       // row-major n x n, index j*n + i
  std::vector<double> omega0;  // initial trace Omega(x, 0)
  double lambda = 0.0;
  int rank = 1;

  double spacing() const;
  // Delta_c = (1/4)(d_xx + d_yy), five-point differences, periodic.
  std::vector<double> laplacian(const std::vector<double>& f) const;
  std::vector<double> omega() const;  // Omega(t) on the grid
};

// Outer boundary data fixed when a trajectory starts: the s-slope u_s, or the
// log-slope u_s/u when `robin` is set.
struct OuterCondition {
  double value = 0.0;
  bool robin = false;
};

struct HeldSlopes {
  OuterCondition metric, scalar, tensor;
};

struct FlowState {
  double t = 0.0;
  RadialKahlerMetric metric;
  MetricFlow metric_flow = MetricFlow::Static;
  std::optional<TensorProfile> tensor;
  std::optional<std::vector<double>> scalar;  // radial u(., t)
  std::optional<TorusBundle> bundle;
  SchemeParams scheme;
  std::optional<HeldSlopes> slopes;  // filled on the first step
};

// Each step advances every field present in the state by scheme.dt, with the
// metric evolving per `metric_flow` and the fields using the metric at both
// time levels. Steps that fail to converge or lose positivity of a flagged
// tensor are retried with dt halved until dt < dt_min.
FlowState kahler_ricci_step(const FlowState& state);
FlowState ricci_flow_step_real_2d(const FlowState& state);
FlowState heat_step(const FlowState& state);
FlowState lichnerowicz_step(const FlowState& state);
FlowState hermitian_einstein_step(const FlowState& state);

// Shared implementation of the wrappers above.
FlowState advance(const FlowState& state, double dt);

// Laplacian e^{-s}(u_ss/b + (m-1)u_s/a) of a radial function (sixth order).
std::vector<double> radial_laplacian(const RadialKahlerMetric& metric, const std::vector<double>& u);

TorusBundle make_torus_bundle(int n, const std::vector<double>& omega0, double lambda);

struct FlowRunConfig {
  std::string initial = "flat";  // fixture tag, see flow_fixture()
  int m = 1;
  double t_start = 0.0;
  double t_end = 1.0;
  double stride = 0.1;
  int grid_n = 2048;
  double rho_max = 1e4;
  int torus_n = 64;
  bool real_normalization = false;  // evolve the metric by the real Ricci flow
  SchemeParams scheme;
};

struct Trajectory {
  std::vector<FlowState> states;
  std::string tag;
  bool failed = false;
  std::string failure;

  std::vector<double> times() const;
  // Index of the snapshot at time t (within 1e-12), or throws.
  std::size_t index_of(double t) const;
};

// Initial state for a fixture tag:
//   flat, flat-perturbed, cigar, cigar-ric, cigar-bump, heat-kernel,
//   flat-rho, flat-log, flat-const, torus-he, torus-const, expanding-soliton
FlowState flow_fixture(const FlowRunConfig& config);

Trajectory run_flow(const FlowRunConfig& config);

// Max relative error of the scalar curvature against R(s - t_k, 0) on
// rho <= rho_interior, where t_k is the Kähler time of each snapshot.
double cigar_self_similarity_error(const Trajectory& traj, double rho_interior);

// Closed-form trajectories sampled at `times` (no time stepping):
//   "cigar-exact"        g = 1/(e^t + rho), Kahler time
//   "cigar-exact-real"   same metric at Kahler time 2t, real time t
//   "...-ric"            either of the above carrying h = Ric
//   "heat-kernel-tensor" flat m = 1, h_{z zbar} = w g, w = e^{-rho/t}/(pi t)
//   "flat-g"             flat of dimension m, h = g
Trajectory analytic_trajectory(const std::string& tag, const std::vector<double>& times, int m = 1,
                               int grid_n = 2048);

// Max change of the interior curvature at t_end when rho_max is doubled.
double boundary_influence(const FlowRunConfig& config, double rho_interior);

// Closed-form heat kernel (pi t)^{-1} exp(-rho/t) on flat C.
double heat_kernel(double rho, double t);

}  // namespace klab
