#include "klab/radial.hpp"

#include <algorithm>
#include <cmath>

#include "klab/errors.hpp"

namespace klab {

RadialGrid RadialGrid::log_uniform(double rho_min, double rho_max, int n) {
  if (!(rho_min > 0.0) || !(rho_max > rho_min) || n < 16) {
    throw InputError("RadialGrid: need 0 < rho_min < rho_max and n >= 16");
  }
  RadialGrid g;
  g.s0 = std::log(rho_min);
  g.h = (std::log(rho_max) - g.s0) / (n - 1);
  g.n = n;
  return g;
}

double RadialGrid::rho(int i) const { return std::exp(s(i)); }

std::vector<double> RadialGrid::s_values() const {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = s(i);
  return v;
}

std::vector<double> RadialGrid::rho_values() const {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = rho(i);
  return v;
}

bool RadialGrid::same_as(const RadialGrid& o) const {
  return n == o.n && std::fabs(s0 - o.s0) < 1e-14 && std::fabs(h - o.h) < 1e-14;
}

std::vector<std::vector<double>> fornberg_weights(double x0, std::span<const double> x, int order) {
  const int n = static_cast<int>(x.size());
  std::vector<std::vector<double>> c(order + 1, std::vector<double>(n, 0.0));
  double c1 = 1.0, c4 = x[0] - x0;
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, order);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[k][i] = c1 * (k * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
        c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
      }
      for (int k = mn; k >= 1; --k) c[k][j] = (c4 * c[k][j] - k * c[k - 1][j]) / c3;
      c[0][j] = c4 * c[0][j] / c3;
    }
    c1 = c2;
  }
  return c;
}

namespace {

Differentiator::Row make_row(int first, int count, int at, int deriv) {
  std::vector<double> x(count);
  for (int j = 0; j < count; ++j) x[j] = first + j;
  auto w = fornberg_weights(double(at), x, deriv);
  return {first, w[deriv]};
}

}  // namespace

Differentiator::Differentiator(const RadialGrid& grid) : n_(grid.n), h_(grid.h) {
  if (n_ < 16) throw InputError("Differentiator: grid too coarse");
  mid1_ = make_row(-3, 7, 0, 1);
  mid2_ = make_row(-3, 7, 0, 2);
  for (int i = 0; i < 3; ++i) {
    edge1_.push_back(make_row(0, 8, i, 1));
    edge2_.push_back(make_row(0, 8, i, 2));
  }
  for (int i = n_ - 3; i < n_; ++i) {
    edge1_.push_back(make_row(n_ - 8, 8, i, 1));
    edge2_.push_back(make_row(n_ - 8, 8, i, 2));
  }
}

const Differentiator::Row& Differentiator::row1(int i) const {
  if (i < 3) return edge1_[i];
  if (i >= n_ - 3) return edge1_[3 + i - (n_ - 3)];
  return mid1_;
}

const Differentiator::Row& Differentiator::row2(int i) const {
  if (i < 3) return edge2_[i];
  if (i >= n_ - 3) return edge2_[3 + i - (n_ - 3)];
  return mid2_;
}

void Differentiator::apply(const std::vector<Row>& edge, const Row& mid, std::span<const double> f,
                           std::span<double> out, double scale) const {
  if (static_cast<int>(f.size()) != n_ || static_cast<int>(out.size()) != n_) {
    throw InputError("Differentiator: profile length does not match grid");
  }
  for (int r = 0; r < 6; ++r) {
    const int i = r < 3 ? r : n_ - 6 + r;
    const Row& row = edge[r];
    double acc = 0.0;
    for (std::size_t j = 0; j < row.w.size(); ++j) acc += row.w[j] * f[row.first + j];
    out[i] = acc * scale;
  }
  const double* w = mid.w.data();
  for (int i = 3; i < n_ - 3; ++i) {
    const double* p = f.data() + i - 3;
    out[i] = scale * (w[0] * p[0] + w[1] * p[1] + w[2] * p[2] + w[3] * p[3] + w[4] * p[4] +
                      w[5] * p[5] + w[6] * p[6]);
  }
}

void Differentiator::d1(std::span<const double> f, std::span<double> out) const {
  apply(edge1_, mid1_, f, out, 1.0 / h_);
}

void Differentiator::d2(std::span<const double> f, std::span<double> out) const {
  apply(edge2_, mid2_, f, out, 1.0 / (h_ * h_));
}

std::vector<double> Differentiator::d1(std::span<const double> f) const {
  std::vector<double> out(f.size());
  d1(f, out);
  return out;
}

std::vector<double> Differentiator::d2(std::span<const double> f) const {
  std::vector<double> out(f.size());
  d2(f, out);
  return out;
}

double origin_value(const RadialGrid& grid, std::span<const double> f) {
  const double r0 = grid.rho(0), r1 = grid.rho(1);
  return f[0] - r0 * (f[1] - f[0]) / (r1 - r0);
}

double interp_s(const RadialGrid& grid, std::span<const double> f, double s) {
  if (static_cast<int>(f.size()) != grid.n) throw InputError("interp_s: profile length mismatch");
  if (s <= grid.s0) {
    const double f0 = origin_value(grid, f);
    const double r = std::exp(s), r0 = grid.rho(0);
    return f0 + (f[0] - f0) * r / r0;
  }
  if (s >= grid.s_max()) return f[grid.n - 1];
  const double u = (s - grid.s0) / grid.h;
  int i = static_cast<int>(std::floor(u)) - 1;
  i = std::clamp(i, 0, grid.n - 4);
  const double t = u - i;  // position relative to node i, nodes at 0,1,2,3
  const double l0 = -(t - 1) * (t - 2) * (t - 3) / 6.0;
  const double l1 = t * (t - 2) * (t - 3) / 2.0;
  const double l2 = -t * (t - 1) * (t - 3) / 2.0;
  const double l3 = t * (t - 1) * (t - 2) / 6.0;
  return l0 * f[i] + l1 * f[i + 1] + l2 * f[i + 2] + l3 * f[i + 3];
}

double interp_rho(const RadialGrid& grid, std::span<const double> f, double rho) {
  if (rho <= 0.0) return origin_value(grid, f);
  return interp_s(grid, f, std::log(rho));
}

std::vector<double> cumulative_integral(const RadialGrid& grid, std::span<const double> f) {
  const int n = grid.n;
  if (static_cast<int>(f.size()) != n) throw InputError("cumulative_integral: profile length mismatch");
  std::vector<double> F(n, 0.0);
  const double h = grid.h;
  for (int i = 0; i + 1 < n; ++i) {
    double inc;
    if (i == 0) {
      inc = h * (9 * f[0] + 19 * f[1] - 5 * f[2] + f[3]) / 24.0;
    } else if (i == n - 2) {
      inc = h * (9 * f[n - 1] + 19 * f[n - 2] - 5 * f[n - 3] + f[n - 4]) / 24.0;
    } else {
      inc = h * (-f[i - 1] + 13 * f[i] + 13 * f[i + 1] - f[i + 2]) / 24.0;
    }
    F[i + 1] = F[i] + inc;
  }
  return F;
}

}  // namespace klab
