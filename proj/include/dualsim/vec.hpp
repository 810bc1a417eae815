#pragma once

// Dense/sparse arithmetic kernels used by the semigroup and Monte Carlo
// inner loops. Every kernel has a scalar reference implementation plus
// optional AVX2/NEON variants; the active backend is chosen once at runtime
// and can be pinned for equivalence testing.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace dualsim::vec {

enum class Backend { Auto, Scalar, Avx2, Neon };

// Pin the backend (tests pin Scalar vs. best available and compare).
// Backend::Auto re-detects the best supported ISA.
void set_backend(Backend b);
Backend active_backend();
std::string backend_name();

// y[i] += a * x[i]
void axpy(double a, const double* x, double* y, std::size_t n);
// sum_i x[i] * y[i]
double dot(const double* x, const double* y, std::size_t n);
// sum_i x[i]
double sum(const double* x, std::size_t n);
// x[i] *= a
void scale(double a, double* x, std::size_t n);

// Compressed sparse row matrix, zero-based.
struct CsrMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::int64_t> row_ptr;  // size rows+1
    std::vector<std::int32_t> col;
    std::vector<double> val;
};

// y = A * x
void spmv(const CsrMatrix& a, const double* x, double* y);

inline void axpy(double a, const std::vector<double>& x, std::vector<double>& y) {
    axpy(a, x.data(), y.data(), x.size());
}
inline double dot(const std::vector<double>& x, const std::vector<double>& y) {
    return dot(x.data(), y.data(), x.size());
}
inline double sum(const std::vector<double>& x) { return sum(x.data(), x.size()); }
inline void scale(double a, std::vector<double>& x) { scale(a, x.data(), x.size()); }

}  // namespace dualsim::vec
