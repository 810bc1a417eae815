#include "dualsim/orthopoly.hpp"

#include <cmath>
#include <stdexcept>

namespace dualsim {

namespace {

template <typename T>
T falling_impl(T a, unsigned k) {
    T out{1};
    for (unsigned i = 0; i < k; ++i) out *= a - T(static_cast<std::int64_t>(i));
    return out;
}

template <typename T>
T rising_impl(T a, unsigned k) {
    T out{1};
    for (unsigned i = 0; i < k; ++i) out *= a + T(static_cast<std::int64_t>(i));
    return out;
}

template <typename T>
T pow_int(T base, int e) {
    if (e < 0) return T{1} / pow_int(base, -e);
    T out{1};
    for (int i = 0; i < e; ++i) out *= base;
    return out;
}

// C_n(x; alpha) = sum_k binom(n,k) (-alpha)^{n-k} (x)_k
template <typename T>
T charlier_impl(unsigned n, T x, T alpha) {
    T acc{0};
    T binom{1};
    for (unsigned k = 0; k <= n; ++k) {
        acc += binom * pow_int(-alpha, static_cast<int>(n - k)) * falling_impl(x, k);
        binom = binom * T(static_cast<std::int64_t>(n - k)) /
                T(static_cast<std::int64_t>(k + 1));
    }
    return acc;
}

// M_n(x; a; p) = sum_k binom(n,k) (1-1/p)^{k-n} (a+k)^{(n-k)} (x)_k
template <typename T>
T meixner_impl(unsigned n, T x, T a, T p) {
    const T q = T{1} - T{1} / p;
    T acc{0};
    T binom{1};
    for (unsigned k = 0; k <= n; ++k) {
        acc += binom * pow_int(q, static_cast<int>(k) - static_cast<int>(n)) *
               rising_impl(a + T(static_cast<std::int64_t>(k)), n - k) * falling_impl(x, k);
        binom = binom * T(static_cast<std::int64_t>(n - k)) /
                T(static_cast<std::int64_t>(k + 1));
    }
    return acc;
}

}  // namespace

double falling_factorial(double a, unsigned k) { return falling_impl(a, k); }
double rising_factorial(double a, unsigned k) { return rising_impl(a, k); }
Rational falling_factorial(const Rational& a, unsigned k) { return falling_impl(a, k); }
Rational rising_factorial(const Rational& a, unsigned k) { return rising_impl(a, k); }

double binomial_coefficient(unsigned n, unsigned k) {
    if (k > n) return 0.0;
    if (k > n - k) k = n - k;
    double out = 1.0;
    for (unsigned i = 0; i < k; ++i) out = out * static_cast<double>(n - i) / (i + 1);
    return out;
}

double charlier(unsigned n, double x, double alpha) {
    if (alpha <= 0.0) throw std::invalid_argument("charlier: alpha must be positive");
    return charlier_impl(n, x, alpha);
}

Rational charlier(unsigned n, const Rational& x, const Rational& alpha) {
    return charlier_impl(n, x, alpha);
}

double meixner(unsigned n, double x, double a, double p) {
    if (a <= 0.0) throw std::invalid_argument("meixner: a must be positive");
    if (p <= 0.0 || p >= 1.0) throw std::invalid_argument("meixner: p must be in (0,1)");
    return meixner_impl(n, x, a, p);
}

Rational meixner(unsigned n, const Rational& x, const Rational& a, const Rational& p) {
    return meixner_impl(n, x, a, p);
}

void krawtchouk_recurrence(unsigned trials, double theta, unsigned n_max,
                           std::vector<double>& a, std::vector<double>& b) {
    if (theta <= 0.0 || theta >= 1.0)
        throw std::invalid_argument("krawtchouk: theta must be in (0,1)");
    if (n_max > trials)
        throw std::invalid_argument("krawtchouk: family has only trials+1 members");
    const Pmf w = binomial_pmf(trials, theta);
    const std::size_t support = trials + 1;
    std::vector<double> weights(support);
    for (std::size_t x = 0; x <= trials; ++x) weights[x] = w(x);

    // Stieltjes procedure: orthogonalize monomials one degree at a time
    // against the binomial weights, tracking the recurrence coefficients.
    std::vector<double> prev(support, 0.0), cur(support, 1.0), next(support);
    double norm_prev = 1.0;
    double norm_cur = 1.0;  // <1,1> = 1
    a.assign(n_max + 1, 0.0);
    b.assign(n_max + 1, 0.0);
    for (unsigned k = 0; k <= n_max; ++k) {
        double xs = 0.0;
        for (std::size_t x = 0; x < support; ++x)
            xs += weights[x] * static_cast<double>(x) * cur[x] * cur[x];
        a[k] = xs / norm_cur;
        b[k] = k == 0 ? 0.0 : norm_cur / norm_prev;
        if (k == n_max) break;
        for (std::size_t x = 0; x < support; ++x)
            next[x] = (static_cast<double>(x) - a[k]) * cur[x] - b[k] * prev[x];
        prev = cur;
        cur = next;
        norm_prev = norm_cur;
        norm_cur = 0.0;
        for (std::size_t x = 0; x < support; ++x) norm_cur += weights[x] * cur[x] * cur[x];
    }
}

double krawtchouk(unsigned n, double x, unsigned trials, double theta) {
    if (n > trials)
        throw std::invalid_argument("krawtchouk: n exceeds trials");
    if (n == 0) return 1.0;
    std::vector<double> a, b;
    krawtchouk_recurrence(trials, theta, n, a, b);
    double prev = 1.0;
    double cur = x - a[0];
    for (unsigned k = 1; k < n; ++k) {
        const double nxt = (x - a[k]) * cur - b[k] * prev;
        prev = cur;
        cur = nxt;
    }
    return cur;
}

double meixner_generating(double t, unsigned x, double a, double p) {
    if (a <= 0.0) throw std::invalid_argument("meixner_generating: a must be positive");
    if (p <= 0.0 || p >= 1.0)
        throw std::invalid_argument("meixner_generating: p must be in (0,1)");
    const double denom = 1.0 - p + t * p;
    const double numer = 1.0 - p + t;
    if (denom <= 0.0 || numer < 0.0)
        throw std::domain_error("meixner_generating: nonpositive base");
    return std::pow(numer / denom, static_cast<double>(x)) * std::pow((1.0 - p) / denom, a);
}

// ---------------------------------------------------------------------------
// Pmf
// ---------------------------------------------------------------------------

Pmf poisson_pmf(double mean) {
    if (mean <= 0.0) throw std::invalid_argument("poisson_pmf: mean must be positive");
    return Pmf{Pmf::Family::Poisson, mean, 0.0};
}

Pmf neg_binomial_pmf(double a, double p) {
    if (a <= 0.0) throw std::invalid_argument("neg_binomial_pmf: a must be positive");
    if (p <= 0.0 || p >= 1.0)
        throw std::invalid_argument("neg_binomial_pmf: p must be in (0,1)");
    return Pmf{Pmf::Family::NegBinomial, a, p};
}

Pmf binomial_pmf(unsigned trials, double theta) {
    if (trials == 0) throw std::invalid_argument("binomial_pmf: trials must be positive");
    if (theta <= 0.0 || theta >= 1.0)
        throw std::invalid_argument("binomial_pmf: theta must be in (0,1)");
    return Pmf{Pmf::Family::Binomial, static_cast<double>(trials), theta};
}

double Pmf::operator()(std::uint64_t k) const {
    switch (family) {
        case Family::Poisson: {
            const double kk = static_cast<double>(k);
            return std::exp(kk * std::log(a) - a - std::lgamma(kk + 1.0));
        }
        case Family::NegBinomial: {
            // (a)^(k) p^k (1-p)^a / k!
            const double kk = static_cast<double>(k);
            return std::exp(std::lgamma(a + kk) - std::lgamma(a) - std::lgamma(kk + 1.0) +
                            kk * std::log(p) + a * std::log1p(-p));
        }
        case Family::Binomial: {
            const auto n = static_cast<std::uint64_t>(a);
            if (k > n) return 0.0;
            const double kk = static_cast<double>(k);
            const double nn = static_cast<double>(n);
            return std::exp(std::lgamma(nn + 1.0) - std::lgamma(kk + 1.0) -
                            std::lgamma(nn - kk + 1.0) + kk * std::log(p) +
                            (nn - kk) * std::log1p(-p));
        }
    }
    return 0.0;
}

double Pmf::mean() const {
    switch (family) {
        case Family::Poisson: return a;
        case Family::NegBinomial: return a * p / (1.0 - p);
        case Family::Binomial: return a * p;
    }
    return 0.0;
}

double Pmf::variance() const {
    switch (family) {
        case Family::Poisson: return a;
        case Family::NegBinomial: return a * p / ((1.0 - p) * (1.0 - p));
        case Family::Binomial: return a * p * (1.0 - p);
    }
    return 0.0;
}

std::uint64_t Pmf::support_bound(double tail) const {
    if (family == Family::Binomial) return static_cast<std::uint64_t>(a);
    long double mass = 0.0L;
    for (std::uint64_t k = 0; k < 1000000; ++k) {
        const double w = (*this)(k);
        mass += static_cast<long double>(w);
        if (1.0L - mass < static_cast<long double>(tail)) return k;
        // pmf underflow past the mode: the remaining tail is negligible
        if (w == 0.0 && static_cast<double>(k) > mean()) return k;
    }
    throw std::runtime_error("Pmf::support_bound: tail did not converge");
}

double Pmf::orthopoly(unsigned n, double x) const {
    switch (family) {
        case Family::Poisson: return charlier(n, x, a);
        case Family::NegBinomial: return meixner(n, x, a, p);
        case Family::Binomial:
            return krawtchouk(n, x, static_cast<unsigned>(a), p);
    }
    return 0.0;
}

double orthogonality_quadrature(const Pmf& law, unsigned n, unsigned m) {
    if (law.family == Pmf::Family::Binomial) {
        long double acc = 0.0L;
        const auto trials = static_cast<std::uint64_t>(law.a);
        for (std::uint64_t k = 0; k <= trials; ++k)
            acc += static_cast<long double>(law.orthopoly(n, static_cast<double>(k))) *
                   static_cast<long double>(law.orthopoly(m, static_cast<double>(k))) *
                   static_cast<long double>(law(k));
        return static_cast<double>(acc);
    }
    long double acc = 0.0L, acc_abs = 0.0L;
    const std::uint64_t mass_tail = law.support_bound(1e-14);
    int quiet = 0;
    for (std::uint64_t k = 0; k < 1000000; ++k) {
        const long double term =
            static_cast<long double>(law.orthopoly(n, static_cast<double>(k))) *
            static_cast<long double>(law.orthopoly(m, static_cast<double>(k))) *
            static_cast<long double>(law(k));
        acc += term;
        acc_abs += term < 0 ? -term : term;
        if (k >= mass_tail) {
            if ((term < 0 ? -term : term) <= 1e-18L * (acc_abs + 1e-300L)) {
                if (++quiet >= 4) return static_cast<double>(acc);
            } else {
                quiet = 0;
            }
        }
    }
    throw std::runtime_error("orthogonality_quadrature: series did not settle");
}

double Pmf::orthopoly_norm_sq(unsigned n) const {
    switch (family) {
        case Family::Poisson: {
            double out = 1.0;
            for (unsigned k = 1; k <= n; ++k) out *= a * k;
            return out;  // alpha^n n!
        }
        case Family::NegBinomial: {
            // p^n n! (a)^(n) / (1-p)^{2n}
            double out = 1.0;
            for (unsigned k = 1; k <= n; ++k)
                out *= p * k * (a + k - 1) / ((1.0 - p) * (1.0 - p));
            return out;
        }
        case Family::Binomial: {
            // norms follow from the recurrence data: E[P_n^2] = b_1 ... b_n
            if (n == 0) return 1.0;
            std::vector<double> ra, rb;
            krawtchouk_recurrence(static_cast<unsigned>(a), p, n, ra, rb);
            double out = 1.0;
            for (unsigned k = 1; k <= n; ++k) out *= rb[k];
            return out;
        }
    }
    return 0.0;
}

}  // namespace dualsim
