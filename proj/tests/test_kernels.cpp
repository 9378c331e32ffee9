#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "klab/errors.hpp"
#include "klab/kernels.hpp"

namespace kk = klab::kernels;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

struct Variant {
  kk::Isa isa;
  void (*tri)(const double*, const double*, const double*, const double*, double*, std::size_t);
  void (*st9)(std::size_t, std::size_t, const double*, const double*, double*);
  double (*dot)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  double (*mx)(const double*, std::size_t);
};

std::vector<Variant> simd_variants() {
  std::vector<Variant> out;
  if (kk::isa_available(kk::Isa::Avx2)) {
    out.push_back({kk::Isa::Avx2, kk::avx2::tridiag_apply, kk::avx2::stencil9_apply,
                   kk::avx2::dot, kk::avx2::axpy, kk::avx2::max_abs});
  }
  if (kk::isa_available(kk::Isa::Neon)) {
    out.push_back({kk::Isa::Neon, kk::neon::tridiag_apply, kk::neon::stencil9_apply,
                   kk::neon::dot, kk::neon::axpy, kk::neon::max_abs});
  }
  return out;
}

}  // namespace

TEST_CASE("scalar tridiag matches hand computation") {
  std::vector<double> lo{0, 1, 2, 3, 0}, di{0, 4, 5, 6, 0}, up{0, 7, 8, 9, 0};
  std::vector<double> x{1, 2, 3, 4, 5}, y(5, -1.0);
  kk::scalar::tridiag_apply(lo.data(), di.data(), up.data(), x.data(), y.data(), 5);
  CHECK(y[0] == -1.0);
  CHECK(y[1] == 1 * 1 + 4 * 2 + 7 * 3);
  CHECK(y[2] == 2 * 2 + 5 * 3 + 8 * 4);
  CHECK(y[3] == 3 * 3 + 6 * 4 + 9 * 5);
  CHECK(y[4] == -1.0);
}

TEST_CASE("scalar stencil9 reproduces the 5-point Laplacian of a quadratic") {
  const std::size_t nx = 7, ny = 6;
  std::vector<double> w(9 * nx * ny, 0.0), x(nx * ny), y(nx * ny, 0.0);
  for (std::size_t c = 0; c < nx * ny; ++c) {
    w[1 * nx * ny + c] = 1.0;
    w[3 * nx * ny + c] = 1.0;
    w[4 * nx * ny + c] = -4.0;
    w[5 * nx * ny + c] = 1.0;
    w[7 * nx * ny + c] = 1.0;
  }
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) x[j * nx + i] = double(i * i + 3 * j * j);
  kk::scalar::stencil9_apply(nx, ny, w.data(), x.data(), y.data());
  for (std::size_t j = 1; j + 1 < ny; ++j)
    for (std::size_t i = 1; i + 1 < nx; ++i) CHECK(y[j * nx + i] == doctest::Approx(8.0));
}

TEST_CASE("SIMD variants agree with scalar reference") {
  std::mt19937_64 rng(1234);
  for (const auto& v : simd_variants()) {
    CAPTURE(kk::isa_name(v.isa));
    for (std::size_t n : {0u, 1u, 2u, 3u, 4u, 5u, 7u, 8u, 9u, 16u, 17u, 31u, 1000u}) {
      auto lo = random_vec(rng, n), di = random_vec(rng, n), up = random_vec(rng, n);
      auto x = random_vec(rng, n), b = random_vec(rng, n);
      std::vector<double> y1(n, 0.5), y2(n, 0.5);
      kk::scalar::tridiag_apply(lo.data(), di.data(), up.data(), x.data(), y1.data(), n);
      v.tri(lo.data(), di.data(), up.data(), x.data(), y2.data(), n);
      CHECK(max_diff(y1, y2) <= 1e-14);

      const double d1 = kk::scalar::dot(x.data(), b.data(), n);
      const double d2 = v.dot(x.data(), b.data(), n);
      CHECK(std::fabs(d1 - d2) <= 1e-13 * (1.0 + double(n)));

      std::vector<double> a1 = b, a2 = b;
      kk::scalar::axpy(-0.7, x.data(), a1.data(), n);
      v.axpy(-0.7, x.data(), a2.data(), n);
      CHECK(max_diff(a1, a2) <= 1e-15 * 4);

      CHECK(kk::scalar::max_abs(x.data(), n) == v.mx(x.data(), n));
    }
    for (std::size_t nx : {3u, 4u, 5u, 6u, 9u, 33u}) {
      const std::size_t ny = nx + 2;
      auto w = random_vec(rng, 9 * nx * ny);
      auto x = random_vec(rng, nx * ny);
      std::vector<double> y1(nx * ny, 0.25), y2(nx * ny, 0.25);
      kk::scalar::stencil9_apply(nx, ny, w.data(), x.data(), y1.data());
      v.st9(nx, ny, w.data(), x.data(), y2.data());
      CHECK(max_diff(y1, y2) <= 1e-13);
    }
  }
}

TEST_CASE("dispatch honours force_isa and validates lengths") {
  const auto saved = kk::active_isa();
  kk::force_isa(kk::Isa::Scalar);
  CHECK(kk::active_isa() == kk::Isa::Scalar);
  std::vector<double> a{1, 2, 3}, b{4, 5, 6};
  CHECK(kk::dot(a, b) == 32.0);
  std::vector<double> c{1, 2};
  CHECK_THROWS_AS(kk::dot(a, c), klab::InputError);
  if (!kk::isa_available(kk::Isa::Neon)) CHECK_THROWS_AS(kk::force_isa(kk::Isa::Neon), klab::InputError);
  kk::force_isa(saved);
}
