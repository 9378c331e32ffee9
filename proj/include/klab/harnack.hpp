#pragma once
// Nondivergence elliptic operators L = sum a^{a b-bar} d_a d_b-bar on flat
// C^m (m = 1, 2): a monotone finite-difference Dirichlet solver, sup/inf
// ratio statistics, the volume inequality for functions with nonnegative
// annulus values, and the contact-set construction with its determinant chain.
//
// Real coordinates are ordered (x_1, y_1, x_2, y_2, ...), as in hermitian.hpp.

#include <cstdint>
#include <functional>
#include <vector>

#include "klab/hermitian.hpp"

namespace klab {

using RealPoint = std::vector<double>;
using RealFunction = std::function<double(const RealPoint&)>;

// Uniform box grid [-half_width, half_width]^{2m} with n nodes per axis,
// node index = sum_k i_k n^k.
struct BoxGrid {
  int m = 1;
  int n = 0;
  double half_width = 1.0;

  BoxGrid() = default;
  BoxGrid(int m, int n, double half_width);

  int dim() const { return 2 * m; }
  double h() const { return 2.0 * half_width / (n - 1); }
  std::size_t size() const;
  double coord(int i) const { return -half_width + h() * i; }
  RealPoint point(std::size_t node) const;
  std::vector<int> index(std::size_t node) const;
  std::size_t node(const std::vector<int>& idx) const;
  std::size_t nearest(const RealPoint& x) const;  // clamped to the box
  bool on_box_boundary(std::size_t node) const;
};

// Piecewise-constant (per node) Hermitian coefficients with eigenvalues in
// [lambda, Lambda].
struct CoefficientField {
  BoxGrid grid;
  SpectrumBounds bounds;
  std::vector<HermitianMatrix> a;

  static CoefficientField constant(const BoxGrid& grid, const HermitianMatrix& a);
  static CoefficientField identity(const BoxGrid& grid);
  // Independent per-node draws: eigenvalues uniform in [lambda, Lambda] and
  // (m = 2) a random unitary frame, redrawn until the real stencil is monotone.
  static CoefficientField random(const BoxGrid& grid, double lambda, double Lambda, std::uint64_t seed);

  const HermitianMatrix& at(const RealPoint& x) const { return a[grid.nearest(x)]; }
};

// Real 2m x 2m matrix A with Lu = tr(A D^2 u).
Eigen::MatrixXd real_coefficients(const HermitianMatrix& a);

struct EllipticSolve {
  BoxGrid grid;
  double domain_radius = 0.0;
  std::vector<double> u;        // boundary data outside the domain
  std::vector<char> interior;   // unknown nodes
  double residual = 0.0;        // max |L_h u - f| over interior nodes
  bool monotone = false;        // every stencil has nonnegative neighbour weights
  double min_interior = 0.0;
  double max_interior = 0.0;
};

// L_h u = f on grid nodes with |x| < domain_radius, u = boundary(x) elsewhere.
// Mixed derivatives use the diagonal pair matching the sign of A_ij, which is
// monotone when A is diagonally dominant; otherwise the field is rejected.
// f = 0 with boundary >= 0 enforces u >= -1e-12.
EllipticSolve solve_nondivergence(const CoefficientField& field, const RealFunction& f, const RealFunction& boundary,
                                  double domain_radius, double tol = 1e-10);

// sup / inf of the solution over grid nodes with |x| <= R.
struct BallExtremes {
  double sup = 0.0;
  double inf = 0.0;
  double ratio = 0.0;
};
BallExtremes ball_extremes(const EllipticSolve& solve, double R);

struct ProbeConfig {
  int m = 1;
  int n = 129;  // nodes per axis on the box [-2R, 2R]^{2m}
  double lambda = 1.0;
  double Lambda = 4.0;
  double R = 1.0;
  int trials = 200;
  int modes = 4;  // boundary data: positive trigonometric polynomial of this degree
  std::uint64_t seed = 42;
};

struct ProbeStats {
  std::vector<double> ratios;
  double q50 = 0.0;
  double q90 = 0.0;
  double max = 0.0;
  int discarded = 0;
  std::uint64_t seed = 0;
  double lambda = 0.0;
  double Lambda = 0.0;
  int m = 1;
};

// Random field and random positive boundary data per trial, solved on B(2R).
ProbeStats harnack_ratio_probe(const ProbeConfig& config);

struct VolumeInequality {
  double lhs = 0.0;  // vol(B_R)
  double rhs = 0.0;
  bool holds = false;
};

// Both sides over the field's grid (half width >= 7R), with Lu from
// second differences of u at step 1e-3 R.
VolumeInequality volume_inequality_eval(const RealFunction& u, const CoefficientField& field, double R,
                                    double tol = 1e-9);

struct ContactPoint {
  RealPoint y;
  RealPoint x;  // grid argmin of w_y over B(7R)
  double u = 0.0;
  double miss = 0.0;  // |phi(x) - y|
};

struct ContactSetReport {
  std::vector<ContactPoint> points;
  std::vector<std::size_t> contact_nodes;  // E, sorted and unique
  double h = 0.0;
  double slack = 0.0;          // one-cell tolerance applied to the checks below
  bool inside_5R = false;      // every argmin in the closure of B(5R)
  bool below_6 = false;        // u <= 6 on E
  bool covers = false;         // every |phi(x) - y| within one cell
  bool boundary_hit = false;   // some argmin on the edge of B(7R)
  double max_miss = 0.0;
};

// w_y = R^2 u + |x - y|^2 / 2 minimized by brute force over nodes of `grid`
// inside B(7R), for y on nodes of the same grid inside B(R) (every y_stride-th
// node along each axis). Throws unless u >= 0 on the annulus B(7R) \ B(5R).
ContactSetReport contact_set_construct(const RealFunction& u, double R, const BoxGrid& grid, int y_stride = 1);

struct ChainLinks {
  // jac <= det_real <= 8^m |det w_cc|^2 <= ... <= 32^m / lambda^{2m} (...)^{2m}
  std::vector<double> values;  // seven terms, left to right
  std::vector<double> slack;   // per link, from a doubled-step recomputation
};

// The chain at one contact pair; throws InputError if D^2 w_y is not PSD at x.
ChainLinks contact_chain_at(const RealFunction& u, const HermitianMatrix& a, const SpectrumBounds& bounds,
                            double R, const RealPoint& x, const RealPoint& y);

struct ChainResult {
  double max_violation = 0.0;     // worst relative (lhs - rhs) over all links and points
  std::vector<double> link_max;   // per link
  int points = 0;
  bool holds = false;
};
ChainResult contact_determinant_chain(const RealFunction& u, const CoefficientField& field, double R,
                                      const ContactSetReport& E, double tol = 1e-8);

// Seeded admissible test function: gamma + (x - p)^T S (x - p) / R^2 plus a
// small cosine ripple, redrawn until u >= 0 on B(7R) \ B(5R) and inf over
// B(2R) <= 1 at the nodes of `grid`.
RealFunction random_admissible_function(const BoxGrid& grid, double R, std::uint64_t seed);

struct HarnackTrials {
  int trials = 0;
  int volume_violations = 0;
  double min_volume_margin = 0.0;  // min rhs / lhs
  int contact_points = 0;
  int chain_violations = 0;        // points with any link beyond tol + slack
  double max_chain_gap = 0.0;
  bool coverage = true;            // every contact set covered its y-mesh
};

// Per trial: random field on [-7R, 7R]^{2m}, random admissible u, the volume
// inequality, the contact set (y_stride) and the chain at every contact point.
HarnackTrials harnack_random_trials(int m, int n, double R, double lambda, double Lambda, int trials,
                                    std::uint64_t seed, int y_stride = 4);

}  // namespace klab
