#pragma once
// Log-radial grid s = log(rho), rho = |z|^2, with finite-difference,
// interpolation and quadrature helpers.

#include <span>
#include <vector>

namespace klab {

struct RadialGrid {
  double s0 = 0.0;  // s of the first sample
  double h = 0.0;   // uniform spacing in s
  int n = 0;

  static RadialGrid log_uniform(double rho_min, double rho_max, int n);
  static RadialGrid standard(int n = 2048) { return log_uniform(1e-6, 1e4, n); }

  double s(int i) const { return s0 + h * i; }
  double rho(int i) const;
  double s_max() const { return s(n - 1); }
  std::vector<double> s_values() const;
  std::vector<double> rho_values() const;
  bool same_as(const RadialGrid& o) const;
};

// Uniform-grid derivatives in s: 7-point centered stencils (6th order) in the
// interior and 8-point one-sided stencils in the three boundary rows.
class Differentiator {
 public:
  explicit Differentiator(const RadialGrid& grid);
  void d1(std::span<const double> f, std::span<double> out) const;
  void d2(std::span<const double> f, std::span<double> out) const;
  std::vector<double> d1(std::span<const double> f) const;
  std::vector<double> d2(std::span<const double> f) const;

  // Weights of the stencil used at row i, as (first index, weights).
  struct Row {
    int first;
    std::vector<double> w;
  };
  const Row& row1(int i) const;
  const Row& row2(int i) const;

 private:
  int n_;
  double h_;
  std::vector<Row> edge1_, edge2_;  // rows 0..2 and n-3..n-1
  Row mid1_, mid2_;
  void apply(const std::vector<Row>& edge, const Row& mid, std::span<const double> f,
             std::span<double> out, double scale) const;
};

// Fornberg weights for derivatives 0..order at x0 from nodes x.
// Returns c[k][j] = weight of node j for derivative k.
std::vector<std::vector<double>> fornberg_weights(double x0, std::span<const double> x, int order);

// Value at rho -> 0 by linear extrapolation in rho from the first two samples.
double origin_value(const RadialGrid& grid, std::span<const double> f);

// Cubic (4-point Lagrange) interpolation in s. Outside the grid: below s0 the
// profile is continued linearly in rho towards the origin value; above the
// last node it is held constant.
double interp_s(const RadialGrid& grid, std::span<const double> f, double s);
double interp_rho(const RadialGrid& grid, std::span<const double> f, double rho);

// F[i] = integral of f ds from s0 to s_i, fourth order (local cubic fits).
std::vector<double> cumulative_integral(const RadialGrid& grid, std::span<const double> f);

}  // namespace klab
