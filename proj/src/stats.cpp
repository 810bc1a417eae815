#include "dualsim/stats.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace dualsim {

namespace {

// series expansion of P(a,x), valid for x < a+1
double gamma_p_series(double a, double x) {
    double ap = a;
    double term = 1.0 / a;
    double sum = term;
    for (int i = 0; i < 500; ++i) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Lentz continued fraction for Q(a,x), valid for x >= a+1
double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 500; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-16) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double gamma_q(double a, double x) {
    if (a <= 0.0 || x < 0.0) throw std::invalid_argument("gamma_q: bad arguments");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_cf(a, x);
}

double chi_square_sf(double stat, unsigned dof) {
    if (dof == 0) return 1.0;
    return gamma_q(0.5 * static_cast<double>(dof), 0.5 * stat);
}

double chi_square_z(double stat, unsigned dof) {
    if (dof == 0) return 0.0;
    const double k = static_cast<double>(dof);
    const double c = 2.0 / (9.0 * k);
    return (std::cbrt(stat / k) - (1.0 - c)) / std::sqrt(c);
}

double MeanVar::std_error() const {
    return n > 1 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0;
}

MeanVar summarize(const std::vector<double>& xs) {
    MeanVar mv;
    for (double x : xs) mv.add(x);
    return mv;
}

ChiSquare chi_square_gof(const std::vector<double>& observed,
                         const std::vector<double>& expected, double min_expected) {
    if (observed.size() != expected.size())
        throw std::invalid_argument("chi_square_gof: size mismatch");
    // pool sparse bins into the previous kept bin, scanning once left to right
    std::vector<double> obs, exp;
    double po = 0.0, pe = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        po += observed[i];
        pe += expected[i];
        if (pe >= min_expected) {
            obs.push_back(po);
            exp.push_back(pe);
            po = pe = 0.0;
        }
    }
    if (pe > 0.0 || po > 0.0) {
        if (exp.empty()) {
            obs.push_back(po);
            exp.push_back(pe);
        } else {
            obs.back() += po;
            exp.back() += pe;
        }
    }
    ChiSquare r;
    if (exp.size() < 2) {
        r.dof = 0;
        return r;
    }
    for (std::size_t i = 0; i < exp.size(); ++i) {
        const double d = obs[i] - exp[i];
        r.stat += d * d / exp[i];
    }
    r.dof = static_cast<unsigned>(exp.size() - 1);
    r.p_value = chi_square_sf(r.stat, r.dof);
    r.z = chi_square_z(r.stat, r.dof);
    return r;
}

double pearson_correlation(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("pearson_correlation: bad input");
    const auto mx = summarize(x);
    const auto my = summarize(y);
    double cov = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) cov += (x[i] - mx.mean) * (y[i] - my.mean);
    cov /= static_cast<double>(x.size() - 1);
    const double denom = std::sqrt(mx.variance() * my.variance());
    if (denom == 0.0) return 0.0;
    return cov / denom;
}

}  // namespace dualsim
