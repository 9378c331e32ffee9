#include "klab/kernels.hpp"

#if defined(__aarch64__)
#include <arm_neon.h>

#include <cmath>

namespace klab::kernels::neon {

void tridiag_apply(const double* lo, const double* di, const double* up,
                   const double* x, double* y, std::size_t n) {
  if (n < 3) return;
  std::size_t i = 1;
  for (; i + 2 < n; i += 2) {
    float64x2_t acc = vmulq_f64(vld1q_f64(lo + i), vld1q_f64(x + i - 1));
    acc = vfmaq_f64(acc, vld1q_f64(di + i), vld1q_f64(x + i));
    acc = vfmaq_f64(acc, vld1q_f64(up + i), vld1q_f64(x + i + 1));
    vst1q_f64(y + i, acc);
  }
  for (; i + 1 < n; ++i) {
    y[i] = std::fma(up[i], x[i + 1], std::fma(di[i], x[i], lo[i] * x[i - 1]));
  }
}

void stencil9_apply(std::size_t nx, std::size_t ny, const double* w,
                    const double* x, double* y) {
  const std::size_t plane = nx * ny;
  const auto snx = static_cast<std::ptrdiff_t>(nx);
  for (std::size_t j = 1; j + 1 < ny; ++j) {
    std::size_t i = 1;
    for (; i + 2 < nx; i += 2) {
      const std::size_t c = j * nx + i;
      float64x2_t acc = vdupq_n_f64(0.0);
      for (int k = 0; k < 9; ++k) {
        const std::ptrdiff_t off = (k / 3 - 1) * snx + (k % 3 - 1);
        acc = vfmaq_f64(acc, vld1q_f64(w + k * plane + c), vld1q_f64(x + c + off));
      }
      vst1q_f64(y + c, acc);
    }
    for (; i + 1 < nx; ++i) {
      const std::size_t c = j * nx + i;
      double acc = 0.0;
      for (int k = 0; k < 9; ++k) {
        const std::ptrdiff_t off = (k / 3 - 1) * snx + (k % 3 - 1);
        acc = std::fma(w[k * plane + c], x[c + off], acc);
      }
      y[c] = acc;
    }
  }
}

double dot(const double* a, const double* b, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vfmaq_f64(acc, vld1q_f64(a + i), vld1q_f64(b + i));
  double r = vaddvq_f64(acc);
  for (; i < n; ++i) r = std::fma(a[i], b[i], r);
  return r;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] = std::fma(alpha, x[i], y[i]);
}

double max_abs(const double* x, std::size_t n) {
  float64x2_t m = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) m = vmaxq_f64(m, vabsq_f64(vld1q_f64(x + i)));
  double r = vmaxvq_f64(m);
  for (; i < n; ++i) r = std::fmax(r, std::fabs(x[i]));
  return r;
}

}  // namespace klab::kernels::neon

#else

namespace klab::kernels::neon {
void tridiag_apply(const double* lo, const double* di, const double* up,
                   const double* x, double* y, std::size_t n) {
  scalar::tridiag_apply(lo, di, up, x, y, n);
}
void stencil9_apply(std::size_t nx, std::size_t ny, const double* w,
                    const double* x, double* y) {
  scalar::stencil9_apply(nx, ny, w, x, y);
}
double dot(const double* a, const double* b, std::size_t n) { return scalar::dot(a, b, n); }
void axpy(double alpha, const double* x, double* y, std::size_t n) { scalar::axpy(alpha, x, y, n); }
double max_abs(const double* x, std::size_t n) { return scalar::max_abs(x, n); }
}  // namespace klab::kernels::neon

#endif
