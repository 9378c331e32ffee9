#include "klab/kernels.hpp"

#include <cmath>

namespace klab::kernels::scalar {

void tridiag_apply(const double* lo, const double* di, const double* up,
                   const double* x, double* y, std::size_t n) {
  for (std::size_t i = 1; i + 1 < n; ++i) {
    y[i] = lo[i] * x[i - 1] + di[i] * x[i] + up[i] * x[i + 1];
  }
}

void stencil9_apply(std::size_t nx, std::size_t ny, const double* w,
                    const double* x, double* y) {
  const std::size_t plane = nx * ny;
  for (std::size_t j = 1; j + 1 < ny; ++j) {
    for (std::size_t i = 1; i + 1 < nx; ++i) {
      const std::size_t c = j * nx + i;
      double acc = 0.0;
      for (int k = 0; k < 9; ++k) {
        const std::ptrdiff_t dj = k / 3 - 1;
        const std::ptrdiff_t di = k % 3 - 1;
        acc += w[k * plane + c] * x[c + dj * static_cast<std::ptrdiff_t>(nx) + di];
      }
      y[c] = acc;
    }
  }
}

double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double max_abs(const double* x, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::fmax(m, std::fabs(x[i]));
  return m;
}

}  // namespace klab::kernels::scalar
