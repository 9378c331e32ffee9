#pragma once
// Independent reference computations used only by the tests.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <functional>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;

// Characteristic polynomial coefficients c[0..n] of A (monic, c[n] = 1) via
// Faddeev-LeVerrier.
inline std::vector<cplx> char_poly(const Eigen::MatrixXcd& A) {
  const int n = static_cast<int>(A.rows());
  std::vector<cplx> c(n + 1);
  c[n] = 1.0;
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(n, n);
  const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(n, n);
  for (int k = 1; k <= n; ++k) {
    M = A * M + c[n - k + 1] * I;
    c[n - k] = -(A * M).trace() / double(k);
  }
  return c;
}

inline cplx horner(const std::vector<cplx>& c, cplx z) {
  cplx r = 0.0;
  for (int i = static_cast<int>(c.size()) - 1; i >= 0; --i) r = r * z + c[i];
  return r;
}

// All roots of the monic polynomial c (ascending coefficients), Durand-Kerner
// iteration followed by Newton polishing.
inline std::vector<cplx> poly_roots(const std::vector<cplx>& c) {
  const int n = static_cast<int>(c.size()) - 1;
  double bound = 0.0;
  for (int i = 0; i < n; ++i) bound = std::max(bound, std::abs(c[i]));
  bound += 1.0;
  std::vector<cplx> z(n);
  for (int i = 0; i < n; ++i) z[i] = bound * std::polar(1.0, 0.4 + 2.0 * M_PI * i / n);
  for (int it = 0; it < 5000; ++it) {
    double change = 0.0;
    for (int i = 0; i < n; ++i) {
      cplx den = 1.0;
      for (int j = 0; j < n; ++j)
        if (j != i) den *= (z[i] - z[j]);
      const cplx dz = horner(c, z[i]) / den;
      z[i] -= dz;
      change = std::max(change, std::abs(dz));
    }
    if (change < 1e-15 * bound) break;
  }
  std::vector<cplx> dc(n);
  for (int i = 1; i <= n; ++i) dc[i - 1] = double(i) * c[i];
  for (auto& r : z) {
    for (int it = 0; it < 3; ++it) {
      const cplx d = horner(dc, r);
      if (std::abs(d) == 0.0) break;
      r -= horner(c, r) / d;
    }
  }
  return z;
}

using RealFn = std::function<double(const Eigen::VectorXd&)>;

// Central second differences of f on R^n.
inline Eigen::MatrixXd fd_hessian(const RealFn& f, const Eigen::VectorXd& x, double h) {
  const int n = static_cast<int>(x.size());
  Eigen::MatrixXd H(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      Eigen::VectorXd pp = x, pm = x, mp = x, mm = x;
      pp(i) += h; pp(j) += h;
      pm(i) += h; pm(j) -= h;
      mp(i) -= h; mp(j) += h;
      mm(i) -= h; mm(j) -= h;
      H(i, j) = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * h * h);
    }
  }
  return H;
}

// Complex Hessian from directional second derivatives only:
// sum f_{a b-bar} v_a conj(v_b) = 1/4 (d^2/dt^2 f(x+tv) + d^2/dt^2 f(x+t i v)),
// then polarization. Coordinates (x1, y1, x2, y2, ...).
inline Eigen::MatrixXcd levi_form_hessian(const RealFn& f, const Eigen::VectorXd& x, double h) {
  const int m = static_cast<int>(x.size()) / 2;
  auto dir2 = [&](const Eigen::VectorXcd& v) {
    Eigen::VectorXd r(2 * m);
    for (int a = 0; a < m; ++a) {
      r(2 * a) = v(a).real();
      r(2 * a + 1) = v(a).imag();
    }
    return (f(x + h * r) - 2.0 * f(x) + f(x - h * r)) / (h * h);
  };
  auto levi = [&](const Eigen::VectorXcd& v) { return 0.25 * (dir2(v) + dir2(cplx(0, 1) * v)); };
  Eigen::MatrixXcd L(m, m);
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) {
      Eigen::VectorXcd ea = Eigen::VectorXcd::Zero(m), eb = Eigen::VectorXcd::Zero(m);
      ea(a) = 1.0;
      eb(b) = 1.0;
      if (a == b) {
        L(a, a) = levi(ea);
        continue;
      }
      const double la = levi(ea), lb = levi(eb);
      const double re = 0.5 * (levi(ea + eb) - la - lb);
      const double im = 0.5 * (levi(ea + cplx(0, 1) * eb) - la - lb);
      L(a, b) = cplx(re, im);
    }
  }
  return L;
}

}  // namespace oracle
