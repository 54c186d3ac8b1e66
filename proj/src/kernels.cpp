#include "sparsear/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>

#include "sparsear/errors.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define SPARSEAR_X86 1
#include <immintrin.h>
#else
#define SPARSEAR_X86 0
#endif

#if defined(__aarch64__)
#define SPARSEAR_NEON 1
#include <arm_neon.h>
#else
#define SPARSEAR_NEON 0
#endif

namespace sparsear::kernels {

// ---------------------------------------------------------------------------
// scalar reference kernels
// ---------------------------------------------------------------------------

namespace scalar {

double dot(const double* a, const double* b, std::size_t n) {
    double acc0 = 0.0, acc1 = 0.0, acc2 = 0.0, acc3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 += a[i] * b[i];
        acc1 += a[i + 1] * b[i + 1];
        acc2 += a[i + 2] * b[i + 2];
        acc3 += a[i + 3] * b[i + 3];
    }
    double tail = 0.0;
    for (; i < n; ++i) tail += a[i] * b[i];
    return ((acc0 + acc1) + (acc2 + acc3)) + tail;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void lattice_step(double k, double* f, double* b, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double fi = f[i];
        const double bi = b[i];
        f[i] = fi - k * bi;
        b[i] = bi - k * fi;
    }
}

// Rotation-based single-bin DFT. The phasor (cr, ci) = e^{-i*omega*t} is
// advanced by multiplication and resynchronised from sin/cos every
// kResyncStride samples to stop rounding drift.
void dft_bin(const double* x, std::size_t n, double omega, double* c, double* s) {
    constexpr std::size_t kResyncStride = 1024;
    const double stepc = std::cos(omega);
    const double steps = std::sin(omega);
    double accc = 0.0, accs = 0.0;
    double cr = 1.0, ci = 0.0;  // e^{-i*omega*0}
    for (std::size_t t = 0; t < n; ++t) {
        if (t != 0 && t % kResyncStride == 0) {
            cr = std::cos(omega * static_cast<double>(t));
            ci = -std::sin(omega * static_cast<double>(t));
        }
        accc += x[t] * cr;
        accs += x[t] * (-ci);  // sin(omega*t) = -Im e^{-i*omega*t}
        const double nr = cr * stepc + ci * steps;
        const double ni = ci * stepc - cr * steps;
        cr = nr;
        ci = ni;
    }
    *c = accc;
    *s = accs;
}

}  // namespace scalar

// ---------------------------------------------------------------------------
// AVX2 kernels (x86-64 only, runtime gated)
// ---------------------------------------------------------------------------

#if SPARSEAR_X86
namespace avx2 {

__attribute__((target("avx2,fma"))) static double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sw = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sw));
}

__attribute__((target("avx2,fma"))) double dot(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    }
    double tail = 0.0;
    for (; i < n; ++i) tail += a[i] * b[i];
    return hsum(_mm256_add_pd(acc0, acc1)) + tail;
}

__attribute__((target("avx2,fma"))) void axpy(double alpha, const double* x, double* y,
                                              std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

__attribute__((target("avx2,fma"))) void lattice_step(double k, double* f, double* b,
                                                       std::size_t n) {
    const __m256d vk = _mm256_set1_pd(k);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vf = _mm256_loadu_pd(f + i);
        const __m256d vb = _mm256_loadu_pd(b + i);
        _mm256_storeu_pd(f + i, _mm256_fnmadd_pd(vk, vb, vf));
        _mm256_storeu_pd(b + i, _mm256_fnmadd_pd(vk, vf, vb));
    }
    for (; i < n; ++i) {
        const double fi = f[i];
        const double bi = b[i];
        f[i] = fi - k * bi;
        b[i] = bi - k * fi;
    }
}

// Four lanes walk t, t+1, t+2, t+3 and advance by e^{-i*4*omega}; lanes are
// resynchronised from libm sin/cos periodically, then horizontally summed.
__attribute__((target("avx2,fma"))) void dft_bin(const double* x, std::size_t n, double omega,
                                                 double* c, double* s) {
    constexpr std::size_t kResyncStride = 1024;  // multiple of 4
    if (n < 8) {
        scalar::dft_bin(x, n, omega, c, s);
        return;
    }
    const double c4 = std::cos(4.0 * omega);
    const double s4 = std::sin(4.0 * omega);
    const __m256d stepc = _mm256_set1_pd(c4);
    const __m256d steps = _mm256_set1_pd(s4);
    __m256d accc = _mm256_setzero_pd();
    __m256d accs = _mm256_setzero_pd();
    __m256d cr = _mm256_setzero_pd(), ci = _mm256_setzero_pd();
    std::size_t t = 0;
    const std::size_t nvec = n - (n % 4);
    for (; t < nvec; t += 4) {
        if (t % kResyncStride == 0) {
            alignas(32) double cr0[4], ci0[4];
            for (int l = 0; l < 4; ++l) {
                const double ph = omega * static_cast<double>(t + static_cast<std::size_t>(l));
                cr0[l] = std::cos(ph);
                ci0[l] = -std::sin(ph);
            }
            cr = _mm256_load_pd(cr0);
            ci = _mm256_load_pd(ci0);
        }
        const __m256d vx = _mm256_loadu_pd(x + t);
        accc = _mm256_fmadd_pd(vx, cr, accc);
        accs = _mm256_fnmadd_pd(vx, ci, accs);
        const __m256d nr = _mm256_fmadd_pd(cr, stepc, _mm256_mul_pd(ci, steps));
        const __m256d ni = _mm256_fnmadd_pd(cr, steps, _mm256_mul_pd(ci, stepc));
        cr = nr;
        ci = ni;
    }
    double accc_s = hsum(accc);
    double accs_s = hsum(accs);
    for (; t < n; ++t) {
        const double ph = omega * static_cast<double>(t);
        accc_s += x[t] * std::cos(ph);
        accs_s += x[t] * std::sin(ph);
    }
    *c = accc_s;
    *s = accs_s;
}

}  // namespace avx2
#endif  // SPARSEAR_X86

// ---------------------------------------------------------------------------
// NEON kernels (aarch64)
// ---------------------------------------------------------------------------

#if SPARSEAR_NEON
namespace neon {

double dot(const double* a, const double* b, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
        acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
    }
    double tail = 0.0;
    for (; i < n; ++i) tail += a[i] * b[i];
    return vaddvq_f64(acc0) + vaddvq_f64(acc1) + tail;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(alpha);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void lattice_step(double k, double* f, double* b, std::size_t n) {
    const float64x2_t vk = vdupq_n_f64(k);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t vf = vld1q_f64(f + i);
        const float64x2_t vb = vld1q_f64(b + i);
        vst1q_f64(f + i, vfmsq_f64(vf, vk, vb));
        vst1q_f64(b + i, vfmsq_f64(vb, vk, vf));
    }
    for (; i < n; ++i) {
        const double fi = f[i];
        const double bi = b[i];
        f[i] = fi - k * bi;
        b[i] = bi - k * fi;
    }
}

void dft_bin(const double* x, std::size_t n, double omega, double* c, double* s) {
    // Two lanes with stride-2 rotation; same resync scheme as the scalar path.
    constexpr std::size_t kResyncStride = 1024;
    if (n < 4) {
        scalar::dft_bin(x, n, omega, c, s);
        return;
    }
    const float64x2_t stepc = vdupq_n_f64(std::cos(2.0 * omega));
    const float64x2_t steps = vdupq_n_f64(std::sin(2.0 * omega));
    float64x2_t accc = vdupq_n_f64(0.0);
    float64x2_t accs = vdupq_n_f64(0.0);
    float64x2_t cr = vdupq_n_f64(0.0), ci = vdupq_n_f64(0.0);
    std::size_t t = 0;
    const std::size_t nvec = n - (n % 2);
    for (; t < nvec; t += 2) {
        if (t % kResyncStride == 0) {
            double cr0[2], ci0[2];
            for (int l = 0; l < 2; ++l) {
                const double ph = omega * static_cast<double>(t + static_cast<std::size_t>(l));
                cr0[l] = std::cos(ph);
                ci0[l] = -std::sin(ph);
            }
            cr = vld1q_f64(cr0);
            ci = vld1q_f64(ci0);
        }
        const float64x2_t vx = vld1q_f64(x + t);
        accc = vfmaq_f64(accc, vx, cr);
        accs = vfmsq_f64(accs, vx, ci);
        const float64x2_t nr = vfmaq_f64(vmulq_f64(ci, steps), cr, stepc);
        const float64x2_t ni = vfmsq_f64(vmulq_f64(ci, stepc), cr, steps);
        cr = nr;
        ci = ni;
    }
    double accc_s = vaddvq_f64(accc);
    double accs_s = vaddvq_f64(accs);
    for (; t < n; ++t) {
        const double ph = omega * static_cast<double>(t);
        accc_s += x[t] * std::cos(ph);
        accs_s += x[t] * std::sin(ph);
    }
    *c = accc_s;
    *s = accs_s;
}

}  // namespace neon
#endif  // SPARSEAR_NEON

// ---------------------------------------------------------------------------
// dispatch
// ---------------------------------------------------------------------------

namespace {

struct Table {
    Backend backend;
    double (*dot)(const double*, const double*, std::size_t);
    void (*axpy)(double, const double*, double*, std::size_t);
    void (*lattice_step)(double, double*, double*, std::size_t);
    void (*dft_bin)(const double*, std::size_t, double, double*, double*);
};

constexpr Table kScalarTable{Backend::scalar, scalar::dot, scalar::axpy, scalar::lattice_step,
                             scalar::dft_bin};

bool backend_supported(Backend b) {
    switch (b) {
        case Backend::scalar:
            return true;
        case Backend::avx2:
#if SPARSEAR_X86
            return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
            return false;
#endif
        case Backend::neon:
            return SPARSEAR_NEON != 0;
    }
    return false;
}

Table make_table(Backend b) {
    switch (b) {
        case Backend::scalar:
            return kScalarTable;
#if SPARSEAR_X86
        case Backend::avx2:
            return Table{Backend::avx2, avx2::dot, avx2::axpy, avx2::lattice_step, avx2::dft_bin};
#endif
#if SPARSEAR_NEON
        case Backend::neon:
            return Table{Backend::neon, neon::dot, neon::axpy, neon::lattice_step, neon::dft_bin};
#endif
        default:
            return kScalarTable;
    }
}

Backend detect_backend() {
    if (const char* env = std::getenv("SPARSEAR_KERNELS")) {
        if (std::strcmp(env, "scalar") == 0) return Backend::scalar;
        if (std::strcmp(env, "avx2") == 0 && backend_supported(Backend::avx2)) return Backend::avx2;
        if (std::strcmp(env, "neon") == 0 && backend_supported(Backend::neon)) return Backend::neon;
        return Backend::scalar;  // unknown or unsupported request: fall back
    }
    if (backend_supported(Backend::avx2)) return Backend::avx2;
    if (backend_supported(Backend::neon)) return Backend::neon;
    return Backend::scalar;
}

Table g_table = make_table(detect_backend());

}  // namespace

Backend active_backend() { return g_table.backend; }

const char* backend_name(Backend b) {
    switch (b) {
        case Backend::scalar:
            return "scalar";
        case Backend::avx2:
            return "avx2";
        case Backend::neon:
            return "neon";
    }
    return "?";
}

void force_backend(Backend b) {
    if (!backend_supported(b)) {
        throw InvalidConfig(std::string("kernel backend not supported on this CPU: ") +
                            backend_name(b));
    }
    g_table = make_table(b);
}

double dot(const double* a, const double* b, std::size_t n) { return g_table.dot(a, b, n); }

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    g_table.axpy(alpha, x, y, n);
}

void lattice_step(double k, double* f, double* b, std::size_t n) {
    g_table.lattice_step(k, f, b, n);
}

void dft_bin(const double* x, std::size_t n, double omega, double* c, double* s) {
    g_table.dft_bin(x, n, omega, c, s);
}

}  // namespace sparsear::kernels
