#pragma once
// Monotone quantities: density of complex curves in C^2 (or zero sets in C),
// spherical means of plurisubharmonic functions and the identity
// r dM/dr = Theta, convexity in log r, parabolic monotonicity of (t u_t)
// along heat flows, and the scaled energy of harmonic maps.

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "klab/flow.hpp"
#include "klab/hermitian.hpp"

namespace klab {

// Polynomial in one variable, ascending coefficients.
using Poly1 = std::vector<cplx>;

cplx poly_eval(const Poly1& p, cplx z);
Poly1 poly_derivative(const Poly1& p);
// All complex roots (companion matrix, Newton-polished). Leading zeros trimmed.
std::vector<cplx> poly_roots(const Poly1& p);

// Polynomial in two variables: sum c z1^i z2^j.
struct Term {
  cplx c;
  int i = 0;
  int j = 0;
};
using Poly2 = std::vector<Term>;

cplx poly_eval(const Poly2& p, cplx z1, cplx z2);
// p(z1, z2 + w) as a polynomial in w.
Poly1 restrict_second(const Poly2& p, cplx z1, cplx z2);

// Holomorphic curve in C^2 as a union of polynomially parametrized branches
// zeta -> (z1(zeta), z2(zeta)), each injective, together with a defining
// polynomial p. m = 1 "curves" are zero sets of a Poly1 in C.
struct AlgebraicCurve {
  struct Branch {
    Poly1 z1, z2;
  };
  std::string tag;
  int m = 2;
  Poly2 p;
  std::vector<Branch> branches;
  Poly1 p1;  // m = 1 only

  static AlgebraicCurve line(cplx a, cplx b);  // a z1 + b z2 = 0
  static AlgebraicCurve node();                // z1 z2 = 0
  static AlgebraicCurve parabola();            // z2 = z1^2
  static AlgebraicCurve cusp();                // z2^2 = z1^3
  static AlgebraicCurve graph(const Poly1& f);  // z2 = f(z1)
  static AlgebraicCurve zeros(const Poly1& p);  // {p = 0} in C
  // line (z1), node (z1z2), parabola (z2-z1^2), cusp (z2^2-z1^3)
  static AlgebraicCurve from_tag(const std::string& tag);

  AlgebraicCurve scaled(double c) const;  // image under z -> c z
  Point at(std::size_t branch, cplx zeta) const;
};

struct SampledCurve {
  std::vector<double> r;
  std::vector<double> value;
  std::vector<double> error;
};

// Theta(x, r) = Area(C cap B_x(r)) / (pi r^2), or the number of zeros in the
// disc for m = 1. `angles` is the finest angular resolution used; the error is
// the change against half of it.
SampledCurve density_theta(const AlgebraicCurve& curve, const Point& x, const std::vector<double>& radii,
                           int angles = 256);

// Stratified Monte Carlo estimate of Theta over the parameter discs, with a
// 95% half-width in `error`. Cross-check only.
SampledCurve density_theta_mc(const AlgebraicCurve& curve, const Point& x, const std::vector<double>& radii,
                              int samples, std::uint64_t seed);

struct MonotonicityResult {
  double min_slope = 0.0;
  double slope_error = 0.0;
  bool holds = false;
};

MonotonicityResult density_monotonicity_check(const AlgebraicCurve& curve, const Point& x,
                                              const std::vector<double>& radii, double tol);

// Multiplicity at x from the number of intersections, within `radius`, of
// the curve with random lines through points near x (the median over trials).
int multiplicity_by_lines(const AlgebraicCurve& curve, const Point& x, int trials, std::uint64_t seed,
                          double radius = 1e-2);

// Plurisubharmonic functions on C^m.
struct PshFunction {
  enum class Kind { LogAbsPoly, NormSq, LogOnePlusNormSq, Constant, Max, SubLog, Gridded };
  Kind kind = Kind::Constant;
  int m = 1;
  Poly1 p1;        // LogAbsPoly, m = 1
  Poly2 p2;        // LogAbsPoly, m = 2
  double c = 0.0;  // Constant
  std::vector<PshFunction> parts;  // Max
  // Gridded (m = 1): samples on [x0, x1] x [y0, y1], row-major ny x nx.
  double x0 = 0, x1 = 0, y0 = 0, y1 = 0;
  int nx = 0, ny = 0;
  std::vector<double> samples;

  static PshFunction log_abs(const Poly1& p);
  static PshFunction log_abs(const Poly2& p);
  static PshFunction norm_sq(int m);
  static PshFunction log_one_plus_norm_sq(int m);
  static PshFunction constant(double c, int m);
  static PshFunction max_of(const PshFunction& a, const PshFunction& b);
  static PshFunction sublog(int m);
  // Samples of f on the box; fails the constructor check if not psh there.
  static PshFunction gridded(const std::function<double(cplx)>& f, double x0, double x1, double y0, double y1,
                             int nx, int ny);
  static PshFunction from_tag(const std::string& tag);

  double operator()(const Point& z) const;
  bool is_log_abs() const { return kind == Kind::LogAbsPoly; }
};

// Min eigenvalue of the finite-difference complex Hessian over `count` seeded
// points in the box |Re z_k|, |Im z_k| <= half_width (non-finite points skipped).
double psh_spot_check(const PshFunction& u, double half_width, int count, std::uint64_t seed);

// Sphere means (solid ball means with `solid`), with error estimates.
SampledCurve spherical_mean(const PshFunction& u, const Point& x, const std::vector<double>& radii,
                            bool solid = false);

// Max over radii of |dM/dlog r - Theta|.
struct IdentityResult {
  double max_gap = 0.0;
  std::vector<double> slope;  // dM/dlog r
  std::vector<double> theta;
};
IdentityResult logr_derivative_identity(const PshFunction& u, const AlgebraicCurve& curve, const Point& x,
                                        const std::vector<double>& radii);

struct ConvexityResult {
  double min_second_diff = 0.0;
  double error = 0.0;
  bool holds = false;
};
ConvexityResult logr_convexity_check(const PshFunction& u, const Point& x, const std::vector<double>& radii,
                                     double tol);

// (t u_t)_t = u_tautau / t and u_tautau, tau = log t, by up to five-point
// differences over the snapshot times.
struct ParabolicResult {
  double min_tw = 0.0;
  double logt_convexity = 0.0;
  bool holds = false;
  std::vector<double> tw;  // (t u_t)_t per (point, interior time), point-major
};
ParabolicResult parabolic_monotonicity_check(const Trajectory& traj, const std::vector<double>& rhos,
                                             const std::vector<double>& times, double tol);

// Closed-form trajectory u = (1/pi)(Ein(rho/t) - gamma + log t) with u_t = heat kernel.
Trajectory heat_potential_trajectory(const std::vector<double>& times, int grid_n = 2048);

struct HarmonicMapSpec {
  enum class Kind { Radial, Linear, Constant };
  Kind kind = Kind::Radial;
  int n = 3;
  std::vector<std::vector<double>> A;  // Linear: k x n

  static HarmonicMapSpec radial(int n);
  static HarmonicMapSpec linear(const std::vector<std::vector<double>>& A);
  static HarmonicMapSpec constant(int n);

  double energy_density(const std::vector<double>& y) const;  // |Du|^2
  // |Du(y) e|^2 for a unit vector e
  double directional_energy(const std::vector<double>& y, const std::vector<double>& e) const;
};

struct EnergyReport {
  SampledCurve energy;                 // I(x, r) = r^{2-n} int_B |Du|^2
  std::vector<double> slope;           // dI/dr by differences
  std::vector<double> boundary_term;   // 2 r^{2-n} int_{dB} |du/dr|^2
  double max_slope_gap = 0.0;
};
EnergyReport harmonic_energy_density(const HarmonicMapSpec& map, const std::vector<double>& x,
                                     const std::vector<double>& radii);

struct LiouvilleReport {
  SampledCurve mean;
  std::vector<double> slope;  // dM/dlog r (Theta)
  double min_second_diff = 0.0;
  bool convex = false;
  bool sublog = false;          // growth tag
  double final_slope = 0.0;
  bool flagged_constant = false;  // M flat and Theta ~ 0 over the sampled range
  bool consistent = false;        // flag agrees with the growth tag
};
LiouvilleReport liouville_demo(const PshFunction& u, bool sublog_growth, const Point& x,
                               const std::vector<double>& radii);

std::vector<double> log_radii(double r0, double r1, int n);

}  // namespace klab
