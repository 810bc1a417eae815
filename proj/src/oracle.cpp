#include "dualsim/oracle.hpp"

#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>

#include <fmt/format.h>

namespace dualsim {

double MultiPoly::eval(const std::vector<double>& counts) const {
    double acc = 0.0;
    for (const auto& [e, c] : terms) {
        double mono = c;
        for (std::size_t x = 0; x < e.size(); ++x)
            for (unsigned j = 0; j < e[x]; ++j) mono *= counts[x];
        acc += mono;
    }
    return acc;
}

MultiPoly& MultiPoly::add(const MultiIndex& e, double coeff) {
    for (auto& [te, tc] : terms) {
        if (te == e) {
            tc += coeff;
            return *this;
        }
    }
    terms.emplace_back(e, coeff);
    return *this;
}

MomentTable::MomentTable(std::vector<Pmf> marginals, unsigned max_degree)
    : max_degree_(max_degree) {
    moments_.reserve(marginals.size());
    for (const auto& law : marginals) {
        std::vector<long double> m(max_degree + 1, 0.0L);
        const std::uint64_t hi = law.support_bound(1e-15) + 16;
        for (std::uint64_t k = 0; k <= hi; ++k) {
            const long double w = static_cast<long double>(law(k));
            long double pw = w;
            m[0] += pw;
            for (unsigned j = 1; j <= max_degree; ++j) {
                pw *= static_cast<long double>(k);
                m[j] += pw;
            }
        }
        moments_.push_back(std::move(m));
    }
}

double MomentTable::moment(std::size_t site, unsigned j) const {
    return static_cast<double>(moments_.at(site).at(j));
}

double MomentTable::expect_monomial(const MultiIndex& e) const {
    long double acc = 1.0L;
    for (std::size_t x = 0; x < e.size(); ++x) acc *= moments_[x][e[x]];
    return static_cast<double>(acc);
}

double MomentTable::expect_product(const MultiPoly& p, const MultiPoly& q) const {
    long double acc = 0.0L;
    MultiIndex e(sites());
    for (const auto& [ep, cp] : p.terms) {
        for (const auto& [eq, cq] : q.terms) {
            long double prod = static_cast<long double>(cp) * static_cast<long double>(cq);
            for (std::size_t x = 0; x < e.size(); ++x)
                prod *= moments_[x][ep[x] + eq[x]];
            acc += prod;
        }
    }
    return static_cast<double>(acc);
}

std::vector<MultiIndex> monomials_up_to(std::size_t sites, unsigned max_total) {
    std::vector<MultiIndex> out;
    MultiIndex cur(sites, 0);
    for (unsigned total = 0; total <= max_total; ++total) {
        // compositions of `total` into `sites` parts, lexicographic
        std::function<void(std::size_t, unsigned)> rec = [&](std::size_t pos, unsigned left) {
            if (pos + 1 == sites) {
                cur[pos] = left;
                out.push_back(cur);
                return;
            }
            for (unsigned v = 0; v <= left; ++v) {
                cur[pos] = v;
                rec(pos + 1, left - v);
            }
        };
        if (sites == 0) {
            if (total == 0) out.push_back({});
            continue;
        }
        rec(0, total);
    }
    return out;
}

namespace {

// Gaussian elimination with partial pivoting; also accumulates the inverse
// for the condition estimate. Long double throughout.
struct DenseSolver {
    std::size_t n;
    std::vector<long double> a;    // row-major
    std::vector<long double> inv;  // identity -> inverse

    explicit DenseSolver(std::vector<long double> matrix, std::size_t dim)
        : n(dim), a(std::move(matrix)), inv(dim * dim, 0.0L) {
        for (std::size_t i = 0; i < n; ++i) inv[i * n + i] = 1.0L;
        factorize();
    }

    void factorize() {
        for (std::size_t col = 0; col < n; ++col) {
            std::size_t piv = col;
            for (std::size_t r = col + 1; r < n; ++r)
                if (std::fabs(static_cast<double>(a[r * n + col])) >
                    std::fabs(static_cast<double>(a[piv * n + col])))
                    piv = r;
            if (a[piv * n + col] == 0.0L)
                throw std::runtime_error("gram_schmidt_In: singular moment matrix");
            if (piv != col) {
                for (std::size_t c = 0; c < n; ++c) {
                    std::swap(a[piv * n + c], a[col * n + c]);
                    std::swap(inv[piv * n + c], inv[col * n + c]);
                }
            }
            const long double d = a[col * n + col];
            for (std::size_t c = 0; c < n; ++c) {
                a[col * n + c] /= d;
                inv[col * n + c] /= d;
            }
            for (std::size_t r = 0; r < n; ++r) {
                if (r == col) continue;
                const long double factor = a[r * n + col];
                if (factor == 0.0L) continue;
                for (std::size_t c = 0; c < n; ++c) {
                    a[r * n + c] -= factor * a[col * n + c];
                    inv[r * n + c] -= factor * inv[col * n + c];
                }
            }
        }
    }

    std::vector<long double> apply_inverse(const std::vector<long double>& b) const {
        std::vector<long double> x(n, 0.0L);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < n; ++c) x[r] += inv[r * n + c] * b[c];
        return x;
    }

    long double inf_norm(const std::vector<long double>& m) const {
        long double best = 0.0L;
        for (std::size_t r = 0; r < n; ++r) {
            long double row = 0.0L;
            for (std::size_t c = 0; c < n; ++c)
                row += m[r * n + c] < 0 ? -m[r * n + c] : m[r * n + c];
            if (row > best) best = row;
        }
        return best;
    }
};

}  // namespace

GramSchmidtResult gram_schmidt_In(const std::vector<Pmf>& marginals,
                                  const MultiIndex& degrees, double cond_limit) {
    if (marginals.size() != degrees.size())
        throw std::invalid_argument("gram_schmidt_In: marginals/degrees mismatch");
    const unsigned total =
        std::accumulate(degrees.begin(), degrees.end(), 0u);
    GramSchmidtResult result;
    if (total == 0) {
        result.poly.add(MultiIndex(degrees.size(), 0), 1.0);
        result.condition = 1.0;
        return result;
    }

    const MomentTable table(marginals, 2 * total);
    const auto basis = monomials_up_to(marginals.size(), total - 1);
    const std::size_t b = basis.size();

    std::vector<long double> gram(b * b);
    std::vector<long double> rhs(b);
    auto raw = [&](const MultiIndex& e1, const MultiIndex& e2) {
        long double acc = 1.0L;
        for (std::size_t x = 0; x < e1.size(); ++x)
            acc *= static_cast<long double>(table.moment(x, e1[x] + e2[x]));
        return acc;
    };
    for (std::size_t i = 0; i < b; ++i) {
        for (std::size_t j = 0; j < b; ++j) gram[i * b + j] = raw(basis[i], basis[j]);
        rhs[i] = raw(basis[i], degrees);
    }

    // diagonal scaling (correlation form) keeps the solve well conditioned
    std::vector<long double> scale(b);
    for (std::size_t i = 0; i < b; ++i) scale[i] = 1.0L / sqrtl(gram[i * b + i]);
    for (std::size_t i = 0; i < b; ++i) {
        for (std::size_t j = 0; j < b; ++j) gram[i * b + j] *= scale[i] * scale[j];
        rhs[i] *= scale[i];
    }

    std::vector<long double> gram_copy = gram;
    DenseSolver solver(std::move(gram), b);
    auto beta = solver.apply_inverse(rhs);
    // one step of iterative refinement on the scaled system
    {
        std::vector<long double> residual(b);
        for (std::size_t i = 0; i < b; ++i) {
            long double acc = rhs[i];
            for (std::size_t j = 0; j < b; ++j) acc -= gram_copy[i * b + j] * beta[j];
            residual[i] = acc;
        }
        const auto corr = solver.apply_inverse(residual);
        for (std::size_t i = 0; i < b; ++i) beta[i] += corr[i];
    }
    for (std::size_t i = 0; i < b; ++i) beta[i] *= scale[i];

    const long double cond =
        solver.inf_norm(gram_copy) * solver.inf_norm(solver.inv);
    result.condition = static_cast<double>(cond);
    if (result.condition > cond_limit)
        throw std::runtime_error(fmt::format(
            "gram_schmidt_In: moment matrix ill-conditioned (cond ~ {:.3e})",
            result.condition));

    result.poly.add(degrees, 1.0);
    for (std::size_t i = 0; i < b; ++i)
        if (beta[i] != 0.0L) result.poly.add(basis[i], -static_cast<double>(beta[i]));
    return result;
}

}  // namespace dualsim
