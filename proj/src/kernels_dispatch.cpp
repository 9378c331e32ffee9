#include <atomic>
#include <cstdlib>
#include <string>

#include "klab/errors.hpp"
#include "klab/kernels.hpp"

namespace klab::kernels {

namespace {

Isa detect() {
  if (const char* env = std::getenv("KLAB_FORCE_SCALAR"); env && std::string(env) == "1") {
    return Isa::Scalar;
  }
#if defined(__x86_64__) || defined(_M_X64)
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return Isa::Avx2;
#elif defined(__aarch64__)
  return Isa::Neon;
#endif
  return Isa::Scalar;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

void check_sizes(std::size_t a, std::size_t b) {
  if (a != b) throw InputError("kernel operand length mismatch");
}

}  // namespace

const char* isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "unknown";
}

Isa active_isa() { return current().load(std::memory_order_relaxed); }

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2:
#if defined(__x86_64__) || defined(_M_X64)
      __builtin_cpu_init();
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::Neon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

void force_isa(Isa isa) {
  if (!isa_available(isa)) throw InputError(std::string("ISA not available: ") + isa_name(isa));
  current().store(isa, std::memory_order_relaxed);
}

void tridiag_apply(std::span<const double> lo, std::span<const double> di,
                   std::span<const double> up, std::span<const double> x,
                   std::span<double> y) {
  const std::size_t n = x.size();
  check_sizes(lo.size(), n);
  check_sizes(di.size(), n);
  check_sizes(up.size(), n);
  check_sizes(y.size(), n);
  switch (active_isa()) {
    case Isa::Avx2: return avx2::tridiag_apply(lo.data(), di.data(), up.data(), x.data(), y.data(), n);
    case Isa::Neon: return neon::tridiag_apply(lo.data(), di.data(), up.data(), x.data(), y.data(), n);
    case Isa::Scalar: break;
  }
  scalar::tridiag_apply(lo.data(), di.data(), up.data(), x.data(), y.data(), n);
}

void stencil9_apply(std::size_t nx, std::size_t ny, std::span<const double> w,
                    std::span<const double> x, std::span<double> y) {
  check_sizes(x.size(), nx * ny);
  check_sizes(y.size(), nx * ny);
  check_sizes(w.size(), 9 * nx * ny);
  switch (active_isa()) {
    case Isa::Avx2: return avx2::stencil9_apply(nx, ny, w.data(), x.data(), y.data());
    case Isa::Neon: return neon::stencil9_apply(nx, ny, w.data(), x.data(), y.data());
    case Isa::Scalar: break;
  }
  scalar::stencil9_apply(nx, ny, w.data(), x.data(), y.data());
}

double dot(std::span<const double> a, std::span<const double> b) {
  check_sizes(a.size(), b.size());
  switch (active_isa()) {
    case Isa::Avx2: return avx2::dot(a.data(), b.data(), a.size());
    case Isa::Neon: return neon::dot(a.data(), b.data(), a.size());
    case Isa::Scalar: break;
  }
  return scalar::dot(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  check_sizes(x.size(), y.size());
  switch (active_isa()) {
    case Isa::Avx2: return avx2::axpy(alpha, x.data(), y.data(), x.size());
    case Isa::Neon: return neon::axpy(alpha, x.data(), y.data(), x.size());
    case Isa::Scalar: break;
  }
  scalar::axpy(alpha, x.data(), y.data(), x.size());
}

double max_abs(std::span<const double> x) {
  switch (active_isa()) {
    case Isa::Avx2: return avx2::max_abs(x.data(), x.size());
    case Isa::Neon: return neon::max_abs(x.data(), x.size());
    case Isa::Scalar: break;
  }
  return scalar::max_abs(x.data(), x.size());
}

}  // namespace klab::kernels
