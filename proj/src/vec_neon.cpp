#include "dualsim/vec.hpp"

// NEON kernels for aarch64. float64x2 lanes; layout mirrors the AVX2 file.

#if defined(__aarch64__) && defined(__ARM_NEON)
#define DUALSIM_NEON 1
#include <arm_neon.h>
#else
#define DUALSIM_NEON 0
#endif

namespace dualsim::vec::neon {

#if DUALSIM_NEON

bool available() { return true; }

void axpy(double a, const double* x, double* y, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(a);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t vy = vld1q_f64(y + i);
        vy = vfmaq_f64(vy, va, vld1q_f64(x + i));
        vst1q_f64(y + i, vy);
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

double dot(const double* x, const double* y, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        acc = vfmaq_f64(acc, vld1q_f64(x + i), vld1q_f64(y + i));
    double s = vaddvq_f64(acc);
    for (; i < n; ++i) s += x[i] * y[i];
    return s;
}

double sum(const double* x, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vld1q_f64(x + i));
    double s = vaddvq_f64(acc);
    for (; i < n; ++i) s += x[i];
    return s;
}

void scale(double a, double* x, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(a);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) vst1q_f64(x + i, vmulq_f64(va, vld1q_f64(x + i)));
    for (; i < n; ++i) x[i] *= a;
}

void spmv(const CsrMatrix& m, const double* x, double* y) {
    for (std::size_t r = 0; r < m.rows; ++r) {
        double s = 0.0;
        for (std::int64_t k = m.row_ptr[r]; k < m.row_ptr[r + 1]; ++k)
            s += m.val[static_cast<std::size_t>(k)] * x[m.col[static_cast<std::size_t>(k)]];
        y[r] = s;
    }
}

#else

bool available() { return false; }
void axpy(double, const double*, double*, std::size_t) {}
double dot(const double*, const double*, std::size_t) { return 0.0; }
double sum(const double*, std::size_t) { return 0.0; }
void scale(double, double*, std::size_t) {}
void spmv(const CsrMatrix&, const double*, double*) {}

#endif

}  // namespace dualsim::vec::neon
