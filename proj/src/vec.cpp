#include "dualsim/vec.hpp"

#include <stdexcept>

namespace dualsim::vec {

// ---------------------------------------------------------------------------
// scalar reference kernels
// ---------------------------------------------------------------------------

namespace scalar {

void axpy(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double dot(const double* x, const double* y, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

double sum(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

void scale(double a, double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

void spmv(const CsrMatrix& m, const double* x, double* y) {
    for (std::size_t r = 0; r < m.rows; ++r) {
        double acc = 0.0;
        for (std::int64_t k = m.row_ptr[r]; k < m.row_ptr[r + 1]; ++k)
            acc += m.val[static_cast<std::size_t>(k)] * x[m.col[static_cast<std::size_t>(k)]];
        y[r] = acc;
    }
}

}  // namespace scalar

// ---------------------------------------------------------------------------
// runtime dispatch
// ---------------------------------------------------------------------------

namespace avx2 {
bool available();
void axpy(double a, const double* x, double* y, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
double sum(const double* x, std::size_t n);
void scale(double a, double* x, std::size_t n);
void spmv(const CsrMatrix& m, const double* x, double* y);
}  // namespace avx2

namespace neon {
bool available();
void axpy(double a, const double* x, double* y, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
double sum(const double* x, std::size_t n);
void scale(double a, double* x, std::size_t n);
void spmv(const CsrMatrix& m, const double* x, double* y);
}  // namespace neon

namespace {

struct KernelTable {
    void (*axpy)(double, const double*, double*, std::size_t);
    double (*dot)(const double*, const double*, std::size_t);
    double (*sum)(const double*, std::size_t);
    void (*scale)(double, double*, std::size_t);
    void (*spmv)(const CsrMatrix&, const double*, double*);
};

constexpr KernelTable kScalarTable{scalar::axpy, scalar::dot, scalar::sum, scalar::scale,
                                   scalar::spmv};
constexpr KernelTable kAvx2Table{avx2::axpy, avx2::dot, avx2::sum, avx2::scale, avx2::spmv};
constexpr KernelTable kNeonTable{neon::axpy, neon::dot, neon::sum, neon::scale, neon::spmv};

Backend detect_best() {
    if (avx2::available()) return Backend::Avx2;
    if (neon::available()) return Backend::Neon;
    return Backend::Scalar;
}

Backend g_backend = detect_best();
const KernelTable* g_table = nullptr;

const KernelTable* table_for(Backend b) {
    switch (b) {
        case Backend::Avx2: return &kAvx2Table;
        case Backend::Neon: return &kNeonTable;
        default: return &kScalarTable;
    }
}

const KernelTable& table() {
    if (!g_table) g_table = table_for(g_backend);
    return *g_table;
}

}  // namespace

void set_backend(Backend b) {
    if (b == Backend::Auto) b = detect_best();
    if (b == Backend::Avx2 && !avx2::available())
        throw std::runtime_error("vec: AVX2 backend not supported on this host");
    if (b == Backend::Neon && !neon::available())
        throw std::runtime_error("vec: NEON backend not supported on this host");
    g_backend = b;
    g_table = table_for(b);
}

Backend active_backend() { return g_backend; }

std::string backend_name() {
    switch (g_backend) {
        case Backend::Avx2: return "avx2";
        case Backend::Neon: return "neon";
        default: return "scalar";
    }
}

void axpy(double a, const double* x, double* y, std::size_t n) { table().axpy(a, x, y, n); }
double dot(const double* x, const double* y, std::size_t n) { return table().dot(x, y, n); }
double sum(const double* x, std::size_t n) { return table().sum(x, n); }
void scale(double a, double* x, std::size_t n) { table().scale(a, x, n); }

void spmv(const CsrMatrix& m, const double* x, double* y) {
    if (m.row_ptr.size() != m.rows + 1)
        throw std::invalid_argument("vec::spmv: malformed row_ptr");
    table().spmv(m, x, y);
}

}  // namespace dualsim::vec
