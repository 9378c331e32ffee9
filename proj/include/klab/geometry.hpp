#pragma once
// U(m)-invariant Kähler model metrics on C^m and their curvature.
//
// A radial metric g = phi'(rho) delta + phi''(rho) conj(z_a) z_b has two
// eigenvalues: a = phi' on the spherical directions (multiplicity m-1) and
// b = (rho a)' on the radial direction. Profiles store log a and log b on a
// log-radial grid so that quantities vanishing like rho keep full relative
// precision near the origin. For m = 1 the metric is g_{z zbar} = b.
//
// Conventions: R_{a bbar} = -d_a d_bbar log det g, R = g^{a bbar} R_{a bbar},
// Laplacian g^{a bbar} d_a d_bbar, Riemannian line element g |dz|^2.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "klab/radial.hpp"

namespace klab {

using Point = std::vector<std::complex<double>>;

// log a = kappa_a log(1+rho) + rem_a, and likewise for b. The analytic trend
// carries the far-field slope, so the stored remainder stays small where
// curvature is small and differencing it does not amplify rounding.
struct RadialKahlerMetric {
  int m = 1;
  RadialGrid grid;
  double kappa_a = 0.0;
  double kappa_b = 0.0;
  std::vector<double> rem_a;
  std::vector<double> rem_b;
  std::string tag;
  bool flat = false;  // exactly flat: lets evaluators use closed forms

  // Checks sizes, finiteness and the origin closure a(0) = b(0).
  void validate() const;
  double log_a(int i) const;
  double log_b(int i) const;
  double a(int i) const { return std::exp(log_a(i)); }
  double b(int i) const { return std::exp(log_b(i)); }
  double b_at(double rho) const;  // interpolated radial eigenvalue
  double a_at(double rho) const;
  double b_origin() const;
  std::vector<double> log_b_values() const;
};

// s-derivatives of log a and log b (trend analytic, remainder by differences).
struct LogDerivatives {
  std::vector<double> la_s, la_ss, lb_s, lb_ss;
};
LogDerivatives log_derivatives(const RadialKahlerMetric& metric);

// Trend function log(1+rho) and its first two s-derivatives.
inline double trend(double rho) { return std::log1p(rho); }
inline double trend_s(double rho) { return rho / (1.0 + rho); }
inline double trend_ss(double rho) { return rho / ((1.0 + rho) * (1.0 + rho)); }

RadialKahlerMetric metric_flat(int m, const RadialGrid& grid = RadialGrid::standard());
// g_{z zbar} = 1/(1+rho) (m = 1).
RadialKahlerMetric metric_cigar(const RadialGrid& grid = RadialGrid::standard());
// phi = log(1+rho): a = 1/(1+rho), b = 1/(1+rho)^2. For m = 1, R = 2.
RadialKahlerMetric metric_fubini_study(int m, const RadialGrid& grid = RadialGrid::standard());

struct CurvatureProfile {
  int m = 1;
  std::vector<double> ric_rad;  // radial eigencomponent of R_{a bbar}
  std::vector<double> ric_sph;  // spherical eigencomponent (m >= 2)
  std::vector<double> scalar;
  // Distinguished bisectional components (m = 2): radial-radial,
  // radial-spherical, spherical-spherical. For m = 1 k11 = scalar.
  std::vector<double> k11, k12, k22;
  double bisectional_min = 0.0;
  double scalar_origin = 0.0;
};

CurvatureProfile curvature(const RadialKahlerMetric& metric);
double bisectional_min(const RadialKahlerMetric& metric);

// Distance from the origin and the eigenvalues of the complex Hessian of d^2.
struct DistanceField {
  Point center;
  RadialGrid grid;
  std::vector<double> d;
  std::vector<double> hess_sph;  // (d^2)' = d sqrt(b) / r
  std::vector<double> hess_rad;  // (rho (d^2)')'
};

DistanceField distance_from_origin(const RadialKahlerMetric& metric);

// Max over samples of the largest eigenvalue of (d_y^2)_{a bbar} - g_{a bbar}.
// Radial metrics support y = 0; flat metrics any y.
double hessian_comparison_check(const RadialKahlerMetric& metric, const Point& y,
                                const std::vector<Point>& samples);

struct SmoothFunction {
  std::function<double(const Eigen::VectorXd&)> value;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;  // optional
};

struct JacobianIdentity {
  double lhs = 0.0;  // det of D(x + grad v) by differences of the gradient
  double rhs = 0.0;  // |det D^2(v + |.-y|^2/2)| by second differences
};

// Flat exponential map exp_x(w) = x + w on R^n.
JacobianIdentity jacobian_identity_check(const SmoothFunction& v, const Eigen::VectorXd& x);

enum class SolitonKind { Steady, Expanding, TrivialFlat };

struct SolitonSpec {
  SolitonKind kind = SolitonKind::TrivialFlat;
  double t0 = 0.0;     // reference time (expanding)
  double shape = 0.0;
  double vscale = 0.0;  // V^z = vscale * z, V = grad f
  double cone_angle = 1.0;
  std::vector<double> potential;  // f on the metric grid
  double soliton_residual = 0.0;     // max |f_{z zbar} - R_{z zbar} - g/t0| / g
  double holomorphy_residual = 0.0;
};

// Expanding Kähler-Ricci soliton with f_{z zbar} = R_{z zbar} + g/t0 (m = 1).
// shape = 0 is the flat Gaussian soliton f = rho/t0.
std::pair<RadialKahlerMetric, SolitonSpec> expanding_soliton_construct(
    int m, double t0, double shape, const RadialGrid& grid = RadialGrid::standard());

// Cigar as a steady soliton: f = log(1+rho), V^z = z.
SolitonSpec steady_cigar_soliton(const RadialKahlerMetric& cigar);

// Independent residual of f_{z zbar} = R_{z zbar} + g/t (1/t dropped when t is
// infinite) by finite differences of the sampled profiles.
double soliton_equation_residual(const RadialKahlerMetric& metric, const std::vector<double>& potential,
                             double t, double rho_max_check);

}  // namespace klab
