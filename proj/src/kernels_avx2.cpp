#include "klab/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>

#include <cmath>

namespace klab::kernels::avx2 {

namespace {
inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}
}  // namespace

void tridiag_apply(const double* lo, const double* di, const double* up,
                   const double* x, double* y, std::size_t n) {
  if (n < 3) return;
  std::size_t i = 1;
  for (; i + 4 < n; i += 4) {
    __m256d acc = _mm256_mul_pd(_mm256_loadu_pd(lo + i), _mm256_loadu_pd(x + i - 1));
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(di + i), _mm256_loadu_pd(x + i), acc);
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(up + i), _mm256_loadu_pd(x + i + 1), acc);
    _mm256_storeu_pd(y + i, acc);
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
    for (; i + 4 < nx; i += 4) {
      const std::size_t c = j * nx + i;
      __m256d acc = _mm256_setzero_pd();
      for (int k = 0; k < 9; ++k) {
        const std::ptrdiff_t off = (k / 3 - 1) * snx + (k % 3 - 1);
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(w + k * plane + c),
                              _mm256_loadu_pd(x + c + off), acc);
      }
      _mm256_storeu_pd(y + c, acc);
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
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc = std::fma(a[i], b[i], acc);
  return acc;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] = std::fma(alpha, x[i], y[i]);
}

double max_abs(const double* x, std::size_t n) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d m = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    m = _mm256_max_pd(m, _mm256_andnot_pd(sign, _mm256_loadu_pd(x + i)));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, m);
  double r = std::fmax(std::fmax(lanes[0], lanes[1]), std::fmax(lanes[2], lanes[3]));
  for (; i < n; ++i) r = std::fmax(r, std::fabs(x[i]));
  return r;
}

}  // namespace klab::kernels::avx2

#else

// Non-x86 builds: the symbols exist so the dispatch table links, but
// isa_available(Isa::Avx2) is false and they are never selected.
namespace klab::kernels::avx2 {
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
}  // namespace klab::kernels::avx2

#endif
