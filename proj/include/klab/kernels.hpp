#pragma once
// Data-parallel inner loops shared by the solvers.
//
// Every kernel has a scalar reference implementation and, where the target
// supports it, an AVX2/FMA (x86-64) or NEON (aarch64) variant. The variant is
// chosen once at runtime from the CPU features; KLAB_FORCE_SCALAR=1 in the
// environment pins the scalar path. Variants agree with the scalar reference
// to rounding (FMA contraction and summation order differ).

#include <cstddef>
#include <span>

namespace klab::kernels {

enum class Isa { Scalar, Avx2, Neon };

const char* isa_name(Isa isa);

// ISA used by the dispatching entry points below.
Isa active_isa();

// True when `isa` can run on this machine (Scalar always can).
bool isa_available(Isa isa);

// Overrides the dispatch choice; throws InputError if `isa` is unavailable.
void force_isa(Isa isa);

// y[i] = lo[i]*x[i-1] + di[i]*x[i] + up[i]*x[i+1] for 1 <= i < n-1.
// y[0] and y[n-1] are left untouched.
void tridiag_apply(std::span<const double> lo, std::span<const double> di,
                   std::span<const double> up, std::span<const double> x,
                   std::span<double> y);

// Nine-point stencil on an nx-by-ny row-major grid, interior nodes only:
//   y[j*nx+i] = sum_k w[k][j*nx+i] * x[(j+dj_k)*nx + (i+di_k)]
// with offsets k = 3*(dj+1) + (di+1), dj,di in {-1,0,1}. `w` holds nine
// planes of nx*ny coefficients laid out back to back.
void stencil9_apply(std::size_t nx, std::size_t ny, std::span<const double> w,
                    std::span<const double> x, std::span<double> y);

double dot(std::span<const double> a, std::span<const double> b);

// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

double max_abs(std::span<const double> x);

// Explicitly selected variants, used by the equivalence tests.
namespace scalar {
void tridiag_apply(const double* lo, const double* di, const double* up,
                   const double* x, double* y, std::size_t n);
void stencil9_apply(std::size_t nx, std::size_t ny, const double* w,
                    const double* x, double* y);
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double max_abs(const double* x, std::size_t n);
}  // namespace scalar

namespace avx2 {
void tridiag_apply(const double* lo, const double* di, const double* up,
                   const double* x, double* y, std::size_t n);
void stencil9_apply(std::size_t nx, std::size_t ny, const double* w,
                    const double* x, double* y);
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double max_abs(const double* x, std::size_t n);
}  // namespace avx2

namespace neon {
void tridiag_apply(const double* lo, const double* di, const double* up,
                   const double* x, double* y, std::size_t n);
void stencil9_apply(std::size_t nx, std::size_t ny, const double* w,
                    const double* x, double* y);
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double max_abs(const double* x, std::size_t n);
}  // namespace neon

}  // namespace klab::kernels
