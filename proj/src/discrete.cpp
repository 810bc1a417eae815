#include "dualsim/discrete.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <queue>
#include <stdexcept>

#include <fmt/format.h>

namespace dualsim {

// ---------------------------------------------------------------------------
// SiteSystem
// ---------------------------------------------------------------------------

void SiteSystem::validate() const {
    if (m < 2) throw std::invalid_argument("SiteSystem: need at least two sites");
    if (sigma != -1 && sigma != 0 && sigma != 1)
        throw std::invalid_argument("SiteSystem: sigma must be -1, 0 or +1");
    if (c.size() != static_cast<std::size_t>(m) ||
        alpha.size() != static_cast<std::size_t>(m))
        throw std::invalid_argument("SiteSystem: dimension mismatch");
    for (int x = 0; x < m; ++x) {
        if (c[static_cast<std::size_t>(x)].size() != static_cast<std::size_t>(m))
            throw std::invalid_argument("SiteSystem: conductance matrix not square");
        if (conductance(x, x) != 0.0)
            throw std::invalid_argument("SiteSystem: conductance diagonal must vanish");
        if (alpha[static_cast<std::size_t>(x)] <= 0.0)
            throw std::invalid_argument("SiteSystem: site weights must be positive");
        if (sigma == -1 &&
            alpha[static_cast<std::size_t>(x)] !=
                std::floor(alpha[static_cast<std::size_t>(x)]))
            throw std::invalid_argument("SiteSystem: exclusion requires integer weights");
        for (int y = 0; y < m; ++y) {
            if (conductance(x, y) < 0.0)
                throw std::invalid_argument("SiteSystem: negative conductance");
            if (conductance(x, y) != conductance(y, x))
                throw std::invalid_argument("SiteSystem: conductances must be symmetric");
        }
    }
    // connectivity of the positive-conductance graph
    std::vector<bool> seen(static_cast<std::size_t>(m), false);
    std::queue<int> bfs;
    bfs.push(0);
    seen[0] = true;
    int reached = 1;
    while (!bfs.empty()) {
        const int x = bfs.front();
        bfs.pop();
        for (int y = 0; y < m; ++y) {
            if (!seen[static_cast<std::size_t>(y)] && conductance(x, y) > 0.0) {
                seen[static_cast<std::size_t>(y)] = true;
                ++reached;
                bfs.push(y);
            }
        }
    }
    if (reached != m) throw std::invalid_argument("SiteSystem: conductance graph not connected");
}

// ---------------------------------------------------------------------------
// SectorEnumeration
// ---------------------------------------------------------------------------

SectorEnumeration::SectorEnumeration(const SiteSystem& sys, unsigned n) : n_(n) {
    sys.validate();
    std::vector<int> cap(static_cast<std::size_t>(sys.m),
                         std::numeric_limits<int>::max());
    if (sys.sigma == -1)
        for (int x = 0; x < sys.m; ++x)
            cap[static_cast<std::size_t>(x)] =
                static_cast<int>(sys.alpha[static_cast<std::size_t>(x)]);

    std::vector<int> cur(static_cast<std::size_t>(sys.m), 0);
    std::function<void(int, int)> rec = [&](int site, int left) {
        if (site == sys.m - 1) {
            if (left <= cap[static_cast<std::size_t>(site)]) {
                cur[static_cast<std::size_t>(site)] = left;
                configs_.push_back(cur);
            }
            return;
        }
        const int top = std::min(left, cap[static_cast<std::size_t>(site)]);
        for (int k = 0; k <= top; ++k) {
            cur[static_cast<std::size_t>(site)] = k;
            rec(site + 1, left - k);
        }
    };
    rec(0, static_cast<int>(n));
    if (configs_.size() > kSectorStateLimit)
        throw std::runtime_error(fmt::format(
            "sector with {} states exceeds the {}-state guard", configs_.size(),
            kSectorStateLimit));
    for (std::size_t i = 0; i < configs_.size(); ++i) index_[configs_[i]] = i;
}

std::size_t SectorEnumeration::index_of(const std::vector<int>& config) const {
    const auto it = index_.find(config);
    if (it == index_.end())
        throw std::out_of_range("SectorEnumeration: configuration not in sector");
    return it->second;
}

// ---------------------------------------------------------------------------
// generators
// ---------------------------------------------------------------------------

namespace {

struct CsrBuilder {
    std::size_t rows, cols;
    std::vector<std::map<std::int32_t, double>> data;

    CsrBuilder(std::size_t r, std::size_t c) : rows(r), cols(c), data(r) {}

    void add(std::size_t r, std::size_t c, double v) {
        if (v == 0.0) return;
        data[r][static_cast<std::int32_t>(c)] += v;
    }

    vec::CsrMatrix finish() const {
        vec::CsrMatrix m;
        m.rows = rows;
        m.cols = cols;
        m.row_ptr.reserve(rows + 1);
        m.row_ptr.push_back(0);
        for (const auto& row : data) {
            for (const auto& [c, v] : row) {
                m.col.push_back(c);
                m.val.push_back(v);
            }
            m.row_ptr.push_back(static_cast<std::int64_t>(m.col.size()));
        }
        return m;
    }
};

}  // namespace

GeneratorMatrix build_generator(const SiteSystem& sys, unsigned n) {
    if (n < 1) throw std::invalid_argument("build_generator: need n >= 1");
    auto sector = std::make_shared<SectorEnumeration>(sys, n);
    if (sector->size() == 0) throw std::invalid_argument("build_generator: empty sector");

    CsrBuilder builder(sector->size(), sector->size());
    double max_exit = 0.0;
    for (std::size_t r = 0; r < sector->size(); ++r) {
        const auto& eta = sector->config(r);
        double exit = 0.0;
        for (int x = 0; x < sys.m; ++x) {
            if (eta[static_cast<std::size_t>(x)] == 0) continue;
            for (int y = 0; y < sys.m; ++y) {
                if (y == x) continue;
                const double rate =
                    sys.conductance(x, y) * eta[static_cast<std::size_t>(x)] *
                    (sys.alpha[static_cast<std::size_t>(y)] +
                     sys.sigma * eta[static_cast<std::size_t>(y)]);
                if (rate <= 0.0) continue;
                std::vector<int> target = eta;
                --target[static_cast<std::size_t>(x)];
                ++target[static_cast<std::size_t>(y)];
                builder.add(r, sector->index_of(target), rate);
                exit += rate;
            }
        }
        builder.add(r, r, -exit);
        max_exit = std::max(max_exit, exit);
    }
    GeneratorMatrix gen;
    gen.sector = sector;
    gen.q = builder.finish();
    gen.max_exit_rate = max_exit;
    return gen;
}

std::size_t tuple_index(const std::vector<int>& tuple, int m) {
    std::size_t idx = 0;
    for (std::size_t i = tuple.size(); i-- > 0;)
        idx = idx * static_cast<std::size_t>(m) + static_cast<std::size_t>(tuple[i]);
    return idx;
}

std::vector<int> index_tuple(std::size_t index, int m, unsigned n) {
    std::vector<int> tuple(n);
    for (unsigned i = 0; i < n; ++i) {
        tuple[i] = static_cast<int>(index % static_cast<std::size_t>(m));
        index /= static_cast<std::size_t>(m);
    }
    return tuple;
}

GeneratorMatrix build_labelled_generator(const SiteSystem& sys, unsigned n) {
    if (n < 1) throw std::invalid_argument("build_labelled_generator: need n >= 1");
    sys.validate();
    std::size_t states = 1;
    for (unsigned i = 0; i < n; ++i) {
        states *= static_cast<std::size_t>(sys.m);
        if (states > kSectorStateLimit)
            throw std::runtime_error("labelled state space exceeds the state guard");
    }

    CsrBuilder builder(states, states);
    double max_exit = 0.0;
    for (std::size_t s = 0; s < states; ++s) {
        const auto tuple = index_tuple(s, sys.m, n);
        std::vector<int> occ(static_cast<std::size_t>(sys.m), 0);
        for (int x : tuple) ++occ[static_cast<std::size_t>(x)];
        double exit = 0.0;
        for (unsigned i = 0; i < n; ++i) {
            const int from = tuple[i];
            for (int y = 0; y < sys.m; ++y) {
                if (y == from) continue;
                const int others = occ[static_cast<std::size_t>(y)];
                const double rate = sys.conductance(from, y) *
                                    (sys.alpha[static_cast<std::size_t>(y)] +
                                     sys.sigma * others);
                if (rate <= 0.0) continue;
                std::vector<int> target = tuple;
                target[i] = y;
                builder.add(s, tuple_index(target, sys.m), rate);
                exit += rate;
            }
        }
        builder.add(s, s, -exit);
        max_exit = std::max(max_exit, exit);
    }
    GeneratorMatrix gen;
    gen.q = builder.finish();
    gen.max_exit_rate = max_exit;
    return gen;
}

// ---------------------------------------------------------------------------
// uniformized semigroup
// ---------------------------------------------------------------------------

namespace {

vec::CsrMatrix transpose(const vec::CsrMatrix& a) {
    vec::CsrMatrix t;
    t.rows = a.cols;
    t.cols = a.rows;
    std::vector<std::int64_t> count(t.rows + 1, 0);
    for (std::int32_t c : a.col) ++count[static_cast<std::size_t>(c) + 1];
    for (std::size_t i = 1; i <= t.rows; ++i) count[i] += count[i - 1];
    t.row_ptr = count;
    t.col.resize(a.col.size());
    t.val.resize(a.val.size());
    std::vector<std::int64_t> next = t.row_ptr;
    for (std::size_t r = 0; r < a.rows; ++r) {
        for (std::int64_t k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) {
            const auto c = static_cast<std::size_t>(a.col[static_cast<std::size_t>(k)]);
            const auto slot = static_cast<std::size_t>(next[c]++);
            t.col[slot] = static_cast<std::int32_t>(r);
            t.val[slot] = a.val[static_cast<std::size_t>(k)];
        }
    }
    return t;
}

constexpr double kPoissonTail = 1e-14;
constexpr double kMaxRatePerSlice = 300.0;  // keeps exp(-rate*dt) in range

}  // namespace

std::vector<double> semigroup_apply(const GeneratorMatrix& gen, double t,
                                    const std::vector<double>& v, bool do_transpose) {
    if (t < 0.0) throw std::invalid_argument("semigroup_apply: negative time");
    if (v.size() != gen.q.rows)
        throw std::invalid_argument("semigroup_apply: dimension mismatch");
    const double rate = gen.max_exit_rate;
    if (t == 0.0 || rate == 0.0) return v;

    const vec::CsrMatrix matrix = do_transpose ? transpose(gen.q) : gen.q;
    const auto slices =
        static_cast<unsigned>(std::ceil(rate * t / kMaxRatePerSlice));
    const double dt = t / static_cast<double>(slices);
    const double a = rate * dt;

    std::vector<double> cur = v;
    std::vector<double> term(v.size()), qv(v.size()), acc(v.size());
    for (unsigned s = 0; s < slices; ++s) {
        std::fill(acc.begin(), acc.end(), 0.0);
        term = cur;
        double weight = std::exp(-a);
        double cumulative = weight;
        vec::axpy(weight, term, acc);
        const unsigned hard_cap = static_cast<unsigned>(10.0 * a) + 200;
        for (unsigned k = 1; k <= hard_cap; ++k) {
            // term <- (I + Q/rate) term
            vec::spmv(matrix, term.data(), qv.data());
            vec::axpy(1.0 / rate, qv, term);
            weight *= a / static_cast<double>(k);
            cumulative += weight;
            vec::axpy(weight, term, acc);
            if (1.0 - cumulative < kPoissonTail) break;
        }
        cur = acc;
    }
    return cur;
}

// ---------------------------------------------------------------------------
// lowering operator and commutator
// ---------------------------------------------------------------------------

vec::CsrMatrix lowering_matrix(const SiteSystem& sys, unsigned n) {
    if (n < 1) throw std::invalid_argument("lowering_matrix: need n >= 1");
    const SectorEnumeration upper(sys, n);
    const SectorEnumeration lower(sys, n - 1);
    CsrBuilder builder(upper.size(), lower.size());
    for (std::size_t r = 0; r < upper.size(); ++r) {
        const auto& eta = upper.config(r);
        for (int x = 0; x < sys.m; ++x) {
            const int k = eta[static_cast<std::size_t>(x)];
            if (k == 0) continue;
            std::vector<int> removed = eta;
            --removed[static_cast<std::size_t>(x)];
            builder.add(r, lower.index_of(removed), static_cast<double>(k));
        }
    }
    return builder.finish();
}

namespace {

// CSR product a*b with dense row scatter; fine at desk scale
vec::CsrMatrix csr_multiply(const vec::CsrMatrix& a, const vec::CsrMatrix& b) {
    if (a.cols != b.rows) throw std::invalid_argument("csr_multiply: shape mismatch");
    CsrBuilder builder(a.rows, b.cols);
    for (std::size_t r = 0; r < a.rows; ++r) {
        for (std::int64_t ka = a.row_ptr[r]; ka < a.row_ptr[r + 1]; ++ka) {
            const auto mid = static_cast<std::size_t>(a.col[static_cast<std::size_t>(ka)]);
            const double av = a.val[static_cast<std::size_t>(ka)];
            for (std::int64_t kb = b.row_ptr[mid]; kb < b.row_ptr[mid + 1]; ++kb)
                builder.add(r, static_cast<std::size_t>(b.col[static_cast<std::size_t>(kb)]),
                            av * b.val[static_cast<std::size_t>(kb)]);
        }
    }
    return builder.finish();
}

double csr_max_abs_diff(const vec::CsrMatrix& a, const vec::CsrMatrix& b) {
    if (a.rows != b.rows || a.cols != b.cols)
        throw std::invalid_argument("csr_max_abs_diff: shape mismatch");
    double best = 0.0;
    for (std::size_t r = 0; r < a.rows; ++r) {
        std::map<std::int32_t, double> row;
        for (std::int64_t k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k)
            row[a.col[static_cast<std::size_t>(k)]] += a.val[static_cast<std::size_t>(k)];
        for (std::int64_t k = b.row_ptr[r]; k < b.row_ptr[r + 1]; ++k)
            row[b.col[static_cast<std::size_t>(k)]] -= b.val[static_cast<std::size_t>(k)];
        for (const auto& [c, v] : row) best = std::max(best, std::fabs(v));
    }
    return best;
}

}  // namespace

double consistency_commutator(const SiteSystem& sys, unsigned n) {
    if (n < 1) throw std::invalid_argument("consistency_commutator: need n >= 1");
    const auto gen_n = build_generator(sys, n);
    const auto lower = lowering_matrix(sys, n);
    if (n == 1) {
        // A maps scalars to the constant on sector 1 and L_0 = 0, so the
        // commutator reduces to L_1 applied to the column of ones
        std::vector<double> ones(gen_n.q.rows, 1.0);
        std::vector<double> out(gen_n.q.rows);
        vec::spmv(gen_n.q, ones.data(), out.data());
        double best = 0.0;
        for (double v : out) best = std::max(best, std::fabs(v));
        return best;
    }
    const auto gen_lo = build_generator(sys, n - 1);
    const auto la = csr_multiply(gen_n.q, lower);
    const auto al = csr_multiply(lower, gen_lo.q);
    return csr_max_abs_diff(la, al);
}

// ---------------------------------------------------------------------------
// exact rational commutator / detailed balance
// ---------------------------------------------------------------------------

namespace {

using RationalRow = std::map<std::size_t, Rational>;
using RationalMatrix = std::vector<RationalRow>;

bool rational_abs_less(const Rational& a, const Rational& b) {
    const Rational aa = abs(a), ab = abs(b);
    return static_cast<__int128>(aa.num()) * ab.den() <
           static_cast<__int128>(ab.num()) * aa.den();
}

RationalMatrix rational_generator(const SiteSystem& sys,
                                  const std::vector<std::vector<Rational>>& c_exact,
                                  const SectorEnumeration& sector) {
    RationalMatrix q(sector.size());
    for (std::size_t r = 0; r < sector.size(); ++r) {
        const auto& eta = sector.config(r);
        Rational exit(0);
        for (int x = 0; x < sys.m; ++x) {
            if (eta[static_cast<std::size_t>(x)] == 0) continue;
            for (int y = 0; y < sys.m; ++y) {
                if (y == x) continue;
                const auto weight =
                    static_cast<std::int64_t>(sys.alpha[static_cast<std::size_t>(y)]) +
                    static_cast<std::int64_t>(sys.sigma) * eta[static_cast<std::size_t>(y)];
                const Rational rate = c_exact[static_cast<std::size_t>(x)]
                                             [static_cast<std::size_t>(y)] *
                                      Rational(eta[static_cast<std::size_t>(x)]) *
                                      Rational(weight);
                if (rate.is_zero()) continue;
                std::vector<int> target = eta;
                --target[static_cast<std::size_t>(x)];
                ++target[static_cast<std::size_t>(y)];
                q[r][sector.index_of(target)] += rate;
                exit += rate;
            }
        }
        q[r][r] -= exit;
    }
    return q;
}

RationalMatrix rational_multiply(const RationalMatrix& a, const RationalMatrix& b) {
    RationalMatrix out(a.size());
    for (std::size_t r = 0; r < a.size(); ++r)
        for (const auto& [mid, av] : a[r])
            for (const auto& [c, bv] : b[mid]) out[r][c] += av * bv;
    return out;
}

}  // namespace

Rational consistency_commutator_exact(const SiteSystem& sys,
                                      const std::vector<std::vector<Rational>>& c_exact,
                                      unsigned n) {
    if (n < 1) throw std::invalid_argument("consistency_commutator_exact: need n >= 1");
    for (double a : sys.alpha)
        if (a != std::floor(a))
            throw std::invalid_argument("exact mode requires integer site weights");
    const SectorEnumeration upper(sys, n);
    const SectorEnumeration lower(sys, n - 1);
    const auto q_n = rational_generator(sys, c_exact, upper);

    // lowering matrix with integer entries
    RationalMatrix a_mat(upper.size());
    for (std::size_t r = 0; r < upper.size(); ++r) {
        const auto& eta = upper.config(r);
        for (int x = 0; x < sys.m; ++x) {
            const int k = eta[static_cast<std::size_t>(x)];
            if (k == 0) continue;
            std::vector<int> removed = eta;
            --removed[static_cast<std::size_t>(x)];
            a_mat[r][lower.index_of(removed)] += Rational(k);
        }
    }

    RationalMatrix diff;
    if (n == 1) {
        diff = RationalMatrix(upper.size());
        for (std::size_t r = 0; r < upper.size(); ++r) {
            Rational row_sum(0);
            for (const auto& [c, v] : q_n[r]) row_sum += v;
            diff[r][0] = row_sum;
        }
    } else {
        const auto q_lo = rational_generator(sys, c_exact, lower);
        const auto la = rational_multiply(q_n, a_mat);
        const auto al = rational_multiply(a_mat, q_lo);
        diff = la;
        for (std::size_t r = 0; r < al.size(); ++r)
            for (const auto& [c, v] : al[r]) diff[r][c] -= v;
    }

    Rational best(0);
    for (const auto& row : diff)
        for (const auto& [c, v] : row)
            if (rational_abs_less(best, v)) best = abs(v);
    return best;
}

// ---------------------------------------------------------------------------
// reversible measures and duality functions
// ---------------------------------------------------------------------------

ReversibleMeasure reversible_measure(const SiteSystem& sys, double theta) {
    sys.validate();
    if (theta <= 0.0) throw std::invalid_argument("reversible_measure: theta must be positive");
    if (sys.sigma == -1 && theta >= 1.0)
        throw std::invalid_argument(
            "reversible_measure: exclusion needs theta in (0,1) (theta = 1 is degenerate)");
    ReversibleMeasure rho;
    rho.theta = theta;
    for (int x = 0; x < sys.m; ++x) {
        const double ax = sys.alpha[static_cast<std::size_t>(x)];
        switch (sys.sigma) {
            case -1:
                rho.marginals.push_back(binomial_pmf(static_cast<unsigned>(ax), theta));
                break;
            case 0: rho.marginals.push_back(poisson_pmf(ax * theta)); break;
            default:
                rho.marginals.push_back(neg_binomial_pmf(ax, theta / (1.0 + theta)));
                break;
        }
    }
    return rho;
}

double ReversibleMeasure::mass(const std::vector<int>& config) const {
    double out = 1.0;
    for (std::size_t x = 0; x < marginals.size(); ++x)
        out *= marginals[x](static_cast<std::uint64_t>(config[x]));
    return out;
}

double ReversibleMeasure::log_mass(const std::vector<int>& config) const {
    double out = 0.0;
    for (std::size_t x = 0; x < marginals.size(); ++x)
        out += std::log(marginals[x](static_cast<std::uint64_t>(config[x])));
    return out;
}

std::vector<double> sector_distribution(const SiteSystem& sys, double theta,
                                        const SectorEnumeration& sector) {
    const auto rho = reversible_measure(sys, theta);
    std::vector<double> weights(sector.size());
    for (std::size_t i = 0; i < sector.size(); ++i) weights[i] = rho.mass(sector.config(i));
    const double total = vec::sum(weights);
    if (total <= 0.0) throw std::runtime_error("sector_distribution: zero sector mass");
    vec::scale(1.0 / total, weights);
    return weights;
}

std::function<double(const std::vector<int>&, const std::vector<int>&)>
duality_function(const SiteSystem& sys, double theta, DualityKind kind) {
    const auto rho = reversible_measure(sys, theta);
    switch (kind) {
        case DualityKind::Cheap:
            return [rho](const std::vector<int>& xi, const std::vector<int>& eta) {
                if (xi != eta) return 0.0;
                return std::exp(-rho.log_mass(xi));
            };
        case DualityKind::Classical:
            return [rho](const std::vector<int>& xi, const std::vector<int>& eta) {
                double out = 1.0;
                for (std::size_t x = 0; x < xi.size(); ++x) {
                    double fac = 1.0;  // xi_x!
                    for (int k = 2; k <= xi[x]; ++k) fac *= static_cast<double>(k);
                    out *= falling_factorial(static_cast<double>(eta[x]),
                                             static_cast<unsigned>(xi[x])) /
                           (rho.marginals[x](static_cast<std::uint64_t>(xi[x])) * fac);
                }
                return out;
            };
        default:
            return [rho](const std::vector<int>& xi, const std::vector<int>& eta) {
                double out = 1.0;
                for (std::size_t x = 0; x < xi.size(); ++x) {
                    double fac = 1.0;
                    for (int k = 2; k <= xi[x]; ++k) fac *= static_cast<double>(k);
                    out *= rho.marginals[x].orthopoly(static_cast<unsigned>(xi[x]),
                                                      static_cast<double>(eta[x])) /
                           (rho.marginals[x](static_cast<std::uint64_t>(xi[x])) * fac);
                }
                return out;
            };
    }
}

DualityCheckResult check_duality(const SiteSystem& sys, double theta, DualityKind kind,
                                 double t, const std::vector<int>& xi,
                                 const std::vector<int>& eta) {
    const auto d = duality_function(sys, theta, kind);
    const unsigned n_eta = static_cast<unsigned>(
        std::accumulate(eta.begin(), eta.end(), 0));
    const unsigned n_xi = static_cast<unsigned>(std::accumulate(xi.begin(), xi.end(), 0));

    const auto gen_eta = build_generator(sys, n_eta);
    std::vector<double> g(gen_eta.sector->size());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = d(xi, gen_eta.sector->config(i));
    const auto evolved_g = semigroup_apply(gen_eta, t, g);

    const auto gen_xi = build_generator(sys, n_xi);
    std::vector<double> h(gen_xi.sector->size());
    for (std::size_t i = 0; i < h.size(); ++i) h[i] = d(gen_xi.sector->config(i), eta);
    const auto evolved_h = semigroup_apply(gen_xi, t, h);

    DualityCheckResult r;
    r.lhs = evolved_g[gen_eta.sector->index_of(eta)];
    r.rhs = evolved_h[gen_xi.sector->index_of(xi)];
    r.abs_diff = std::fabs(r.lhs - r.rhs);
    return r;
}

// ---------------------------------------------------------------------------
// intertwining checks
// ---------------------------------------------------------------------------

MultiPoly orthogonal_polynomial_of(const SiteSystem& sys, double theta, unsigned n,
                                   const SymmetricFn& f) {
    if (f.arity() != n) throw std::invalid_argument("orthogonal_polynomial_of: arity mismatch");
    const auto rho = reversible_measure(sys, theta);
    std::size_t states = 1;
    for (unsigned i = 0; i < n; ++i) states *= static_cast<std::size_t>(sys.m);

    // group tuples by their occupation multi-index: the monomial expansion of
    // the n-fold product integral
    std::map<MultiIndex, double> weight;
    std::vector<double> pts(n);
    for (std::size_t s = 0; s < states; ++s) {
        const auto tuple = index_tuple(s, sys.m, n);
        MultiIndex e(static_cast<std::size_t>(sys.m), 0);
        for (unsigned i = 0; i < n; ++i) {
            pts[i] = static_cast<double>(tuple[i]);
            ++e[static_cast<std::size_t>(tuple[i])];
        }
        const double v = f.eval(pts.data());
        if (v != 0.0) weight[e] += v;
    }

    MultiPoly out;
    std::map<MultiIndex, MultiPoly> cache;
    for (const auto& [e, w] : weight) {
        auto it = cache.find(e);
        if (it == cache.end())
            it = cache.emplace(e, gram_schmidt_In(rho.marginals, e).poly).first;
        for (const auto& [term, coeff] : it->second.terms) out.add(term, w * coeff);
    }
    return out;
}

IntertwiningCheckResult check_intertwining(const SiteSystem& sys, unsigned n,
                                           unsigned total_particles, double t,
                                           const SymmetricFn& f, IntertwinerKind kind,
                                           double theta) {
    if (n > total_particles)
        throw std::invalid_argument("check_intertwining: n exceeds total particles");
    if (f.arity() != n) throw std::invalid_argument("check_intertwining: arity mismatch");

    const auto gen_total = build_generator(sys, total_particles);
    const auto& sector = *gen_total.sector;

    // evolve the coefficient function with the labelled n-particle semigroup
    const auto gen_lab = build_labelled_generator(sys, n);
    std::vector<double> coeff(gen_lab.q.rows);
    std::vector<double> pts(n);
    for (std::size_t s = 0; s < coeff.size(); ++s) {
        const auto tuple = index_tuple(s, sys.m, n);
        for (unsigned i = 0; i < n; ++i) pts[i] = static_cast<double>(tuple[i]);
        coeff[s] = f.eval(pts.data());
    }
    const auto evolved = semigroup_apply(gen_lab, t, coeff);
    double bound = 1.0;
    for (double v : evolved) bound = std::max(bound, std::fabs(v));
    const int m = sys.m;
    const SymmetricFn evolved_fn = SymmetricFn::generic(
        n, bound, [evolved, m](const double* xs, std::size_t k) {
            std::vector<int> tuple(k);
            for (std::size_t i = 0; i < k; ++i) tuple[i] = static_cast<int>(xs[i]);
            return evolved[tuple_index(tuple, m)];
        });

    std::vector<double> lhs0(sector.size()), rhs(sector.size());
    if (kind == IntertwinerKind::Classical) {
        for (std::size_t i = 0; i < sector.size(); ++i) {
            const auto cm = CountingMeasure::from_occupation(sector.config(i));
            lhs0[i] = factorial_integral(cm, n, f);
            rhs[i] = factorial_integral(cm, n, evolved_fn);
        }
    } else {
        const MultiPoly p_f = orthogonal_polynomial_of(sys, theta, n, f);
        const MultiPoly p_g = orthogonal_polynomial_of(sys, theta, n, evolved_fn);
        std::vector<double> counts(static_cast<std::size_t>(sys.m));
        for (std::size_t i = 0; i < sector.size(); ++i) {
            const auto& cfg = sector.config(i);
            for (std::size_t x = 0; x < counts.size(); ++x)
                counts[x] = static_cast<double>(cfg[x]);
            lhs0[i] = p_f.eval(counts);
            rhs[i] = p_g.eval(counts);
        }
    }
    const auto lhs = semigroup_apply(gen_total, t, lhs0);

    IntertwiningCheckResult r;
    r.states_checked = sector.size();
    for (std::size_t i = 0; i < sector.size(); ++i) {
        const double dev = std::fabs(lhs[i] - rhs[i]);
        if (dev > r.max_abs_deviation) {
            r.max_abs_deviation = dev;
            r.lhs_at_worst = lhs[i];
            r.rhs_at_worst = rhs[i];
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// detailed balance
// ---------------------------------------------------------------------------

double detailed_balance_residual(const SiteSystem& sys, double theta, unsigned n) {
    const auto gen = build_generator(sys, n);
    const auto& sector = *gen.sector;
    const auto pi = sector_distribution(sys, theta, sector);

    // collect rates into a dense map for pair lookup
    std::map<std::pair<std::size_t, std::size_t>, double> rate;
    for (std::size_t r = 0; r < gen.q.rows; ++r)
        for (std::int64_t k = gen.q.row_ptr[r]; k < gen.q.row_ptr[r + 1]; ++k) {
            const auto c = static_cast<std::size_t>(gen.q.col[static_cast<std::size_t>(k)]);
            if (c != r) rate[{r, c}] = gen.q.val[static_cast<std::size_t>(k)];
        }
    double best = 0.0;
    for (const auto& [pair, q_fwd] : rate) {
        const auto [r, c] = pair;
        const auto it = rate.find({c, r});
        const double q_bwd = it == rate.end() ? 0.0 : it->second;
        best = std::max(best, std::fabs(pi[r] * q_fwd - pi[c] * q_bwd));
    }
    return best;
}

Rational detailed_balance_residual_exact(const SiteSystem& sys,
                                         const std::vector<std::vector<Rational>>& c_exact,
                                         unsigned n) {
    // within a sector the theta-dependent factor of rho is constant, so
    // detailed balance is equivalent to W(eta) q(eta,eta') = W(eta') q(eta',eta)
    // with W(eta) = prod_x w_x(eta_x)/eta_x!; this is exact in rationals
    for (double a : sys.alpha)
        if (a != std::floor(a))
            throw std::invalid_argument("exact mode requires integer site weights");
    const SectorEnumeration sector(sys, n);
    const auto q = rational_generator(sys, c_exact, sector);

    auto site_weight = [&](int x, int k) {
        const auto ax = static_cast<std::int64_t>(sys.alpha[static_cast<std::size_t>(x)]);
        Rational w(1);
        for (int i = 0; i < k; ++i) {
            switch (sys.sigma) {
                case -1: w *= Rational(ax - i); break;
                case 0: w *= Rational(ax); break;
                default: w *= Rational(ax + i); break;
            }
            w = w / Rational(i + 1);  // divide by k! incrementally
        }
        return w;
    };
    std::vector<Rational> weight(sector.size(), Rational(1));
    for (std::size_t i = 0; i < sector.size(); ++i) {
        const auto& cfg = sector.config(i);
        for (int x = 0; x < sys.m; ++x)
            weight[i] *= site_weight(x, cfg[static_cast<std::size_t>(x)]);
    }

    Rational best(0);
    for (std::size_t r = 0; r < q.size(); ++r) {
        for (const auto& [c, v] : q[r]) {
            if (c == r) continue;
            Rational back(0);
            const auto itc = q[c].find(r);
            if (itc != q[c].end()) back = itc->second;
            const Rational resid = weight[r] * v - weight[c] * back;
            if (rational_abs_less(best, resid)) best = abs(resid);
        }
    }
    return best;
}

}  // namespace dualsim
