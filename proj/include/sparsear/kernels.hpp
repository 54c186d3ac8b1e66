#pragma once

#include <cstddef>
#include <string>

// Data-parallel inner loops shared by the whole library. Every kernel exists
// as a scalar reference implementation plus SIMD variants (AVX2 on x86-64,
// NEON on aarch64) selected once at startup from CPU capabilities. The scalar
// versions stay callable so equivalence tests can compare backends directly.
//
// Backend selection may be overridden with the environment variable
// SPARSEAR_KERNELS=scalar|avx2|neon or programmatically via force_backend().
// Results between backends agree to rounding-order differences only; a fixed
// binary on a fixed machine always takes the same path, which is what the
// reproducibility guarantees elsewhere in the library rely on.

namespace sparsear::kernels {

enum class Backend { scalar, avx2, neon };

Backend active_backend();
const char* backend_name(Backend b);

// Throws sparsear::InvalidConfig if the backend is unsupported on this CPU.
void force_backend(Backend b);

// Inner product sum_i a[i]*b[i].
double dot(const double* a, const double* b, std::size_t n);

// y[i] += alpha * x[i].
void axpy(double alpha, const double* x, double* y, std::size_t n);

// One Burg lattice update: simultaneously
//   f[i] <- f[i] - k*b[i],  b[i] <- b[i] - k*f_old[i].
void lattice_step(double k, double* f, double* b, std::size_t n);

// Single-frequency DFT accumulation:
//   c = sum_t x[t]*cos(omega*t),  s = sum_t x[t]*sin(omega*t),  t = 0..n-1.
// Phase is tracked by stepwise rotation with periodic resynchronisation.
void dft_bin(const double* x, std::size_t n, double omega, double* c, double* s);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void lattice_step(double k, double* f, double* b, std::size_t n);
void dft_bin(const double* x, std::size_t n, double omega, double* c, double* s);
}  // namespace scalar

}  // namespace sparsear::kernels
