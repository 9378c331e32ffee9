#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <functional>

#include "klab/errors.hpp"
#include "klab/monotonicity.hpp"

namespace klab {

namespace {

using Vec = std::vector<double>;
using GL = boost::math::quadrature::gauss<double, 24>;
constexpr int kCircle = 64;

// Integral over the unit sphere S^{d-1} in R^d by nested polar angles.
double sphere_integral(int d, const std::function<double(const Vec&)>& f) {
  if (d == 2) {
    double s = 0.0;
    for (int k = 0; k < kCircle; ++k) {
      const double a = 2.0 * M_PI * k / kCircle;
      s += f(Vec{std::cos(a), std::sin(a)});
    }
    return s * 2.0 * M_PI / kCircle;
  }
  auto over_a = [&](double a) {
    const double c = std::cos(a), sn = std::sin(a);
    return std::pow(sn, d - 2) * sphere_integral(d - 1, [&](const Vec& w) {
             Vec th(d);
             th[0] = c;
             for (int k = 0; k < d - 1; ++k) th[k + 1] = sn * w[k];
             return f(th);
           });
  };
  return GL::integrate(over_a, 0.0, M_PI);
}

double norm2(const Vec& y) {
  double s = 0.0;
  for (double v : y) s += v * v;
  return s;
}

Vec along(const Vec& x, double r, const Vec& th) {
  Vec y(x);
  for (std::size_t k = 0; k < y.size(); ++k) y[k] += r * th[k];
  return y;
}

}  // namespace

HarmonicMapSpec HarmonicMapSpec::radial(int n) {
  if (n <= 2) throw InputError("harmonic map: n >= 3");
  HarmonicMapSpec h;
  h.kind = Kind::Radial;
  h.n = n;
  return h;
}

HarmonicMapSpec HarmonicMapSpec::linear(const std::vector<std::vector<double>>& A) {
  if (A.empty() || A[0].size() <= 2) throw InputError("harmonic map: n >= 3");
  for (const auto& row : A)
    if (row.size() != A[0].size()) throw InputError("harmonic map: ragged matrix");
  HarmonicMapSpec h;
  h.kind = Kind::Linear;
  h.n = static_cast<int>(A[0].size());
  h.A = A;
  return h;
}

HarmonicMapSpec HarmonicMapSpec::constant(int n) {
  if (n <= 2) throw InputError("harmonic map: n >= 3");
  HarmonicMapSpec h;
  h.kind = Kind::Constant;
  h.n = n;
  return h;
}

double HarmonicMapSpec::energy_density(const Vec& y) const {
  switch (kind) {
    case Kind::Radial: return (n - 1) / norm2(y);
    case Kind::Linear: {
      double s = 0.0;
      for (const auto& row : A)
        for (double a : row) s += a * a;
      return s;
    }
    case Kind::Constant: return 0.0;
  }
  return 0.0;
}

double HarmonicMapSpec::directional_energy(const Vec& y, const Vec& e) const {
  switch (kind) {
    case Kind::Radial: {
      // Du = (I - yhat yhat^T) / |y|
      const double r2 = norm2(y);
      double ye = 0.0, ee = 0.0;
      for (int k = 0; k < n; ++k) {
        ye += y[k] * e[k];
        ee += e[k] * e[k];
      }
      return (ee - ye * ye / r2) / r2;
    }
    case Kind::Linear: {
      double s = 0.0;
      for (const auto& row : A) {
        double v = 0.0;
        for (int k = 0; k < n; ++k) v += row[k] * e[k];
        s += v * v;
      }
      return s;
    }
    case Kind::Constant: return 0.0;
  }
  return 0.0;
}

EnergyReport harmonic_energy_density(const HarmonicMapSpec& map, const Vec& x, const Vec& radii) {
  const int n = map.n;
  if (n <= 2) throw InputError("harmonic map: n >= 3");
  if (static_cast<int>(x.size()) != n) throw InputError("harmonic map: centre dimension mismatch");
  if (radii.empty()) throw InputError("no radii");
  for (std::size_t k = 0; k < radii.size(); ++k)
    if (!(radii[k] > 0.0) || (k > 0 && !(radii[k] > radii[k - 1]))) throw InputError("radii must increase");

  auto energy = [&](double r) {
    auto shell = [&](double s) {
      return std::pow(s, n - 1) * sphere_integral(n, [&](const Vec& th) { return map.energy_density(along(x, s, th)); });
    };
    return std::pow(r, 2 - n) * GL::integrate(shell, 0.0, r);
  };
  EnergyReport rep;
  rep.energy.r = radii;
  for (double r : radii) {
    const double I = energy(r);
    rep.energy.value.push_back(I);
    const double d = 1e-3 * r;
    const double lo = energy(r - d), hi = energy(r + d);
    rep.energy.error.push_back(std::fabs(hi - 2.0 * I + lo));
    rep.slope.push_back((hi - lo) / (2.0 * d));
    const double b =
        2.0 * r * sphere_integral(n, [&](const Vec& th) { return map.directional_energy(along(x, r, th), th); });
    rep.boundary_term.push_back(b);
    rep.max_slope_gap = std::max(rep.max_slope_gap, std::fabs(rep.slope.back() - b));
  }
  return rep;
}

}  // namespace klab
