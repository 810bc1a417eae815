#include "dualsim/vec.hpp"

// AVX2 + FMA kernels. This file is compiled with -mavx2 -mfma on x86-64;
// callers reach it only after the runtime check in available().

#if defined(__x86_64__) || defined(_M_X64)
#define DUALSIM_X86 1
#include <immintrin.h>
#else
#define DUALSIM_X86 0
#endif

namespace dualsim::vec::avx2 {

#if DUALSIM_X86 && defined(__AVX2__) && defined(__FMA__)

bool available() { return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"); }

void axpy(double a, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        __m256d vx = _mm256_loadu_pd(x + i);
        vy = _mm256_fmadd_pd(va, vx, vy);
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

static inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d swap = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, swap));
}

double dot(const double* x, const double* y, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4)
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

double sum(const double* x, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + i));
        acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(x + i + 4));
    }
    for (; i + 4 <= n; i += 4) acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + i));
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += x[i];
    return acc;
}

void scale(double a, double* x, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    for (; i < n; ++i) x[i] *= a;
}

void spmv(const CsrMatrix& m, const double* x, double* y) {
    for (std::size_t r = 0; r < m.rows; ++r) {
        const std::int64_t begin = m.row_ptr[r];
        const std::int64_t end = m.row_ptr[r + 1];
        __m256d acc = _mm256_setzero_pd();
        std::int64_t k = begin;
        for (; k + 4 <= end; k += 4) {
            __m128i idx = _mm_loadu_si128(
                reinterpret_cast<const __m128i*>(m.col.data() + k));
            __m256d vx = _mm256_i32gather_pd(x, idx, 8);
            __m256d vv = _mm256_loadu_pd(m.val.data() + k);
            acc = _mm256_fmadd_pd(vv, vx, acc);
        }
        double s = hsum(acc);
        for (; k < end; ++k)
            s += m.val[static_cast<std::size_t>(k)] * x[m.col[static_cast<std::size_t>(k)]];
        y[r] = s;
    }
}

#else  // non-x86 or AVX2 not enabled at compile time: stubs, never selected

bool available() { return false; }
void axpy(double, const double*, double*, std::size_t) {}
double dot(const double*, const double*, std::size_t) { return 0.0; }
double sum(const double*, std::size_t) { return 0.0; }
void scale(double, double*, std::size_t) {}
void spmv(const CsrMatrix&, const double*, double*) {}

#endif

}  // namespace dualsim::vec::avx2
