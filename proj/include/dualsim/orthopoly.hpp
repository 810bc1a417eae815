#pragma once

// Univariate special functions: falling/rising factorials, the monic
// Charlier / Meixner / Krawtchouk families, the Meixner generating function,
// and the discrete laws they are orthogonal against.

#include <cstdint>
#include <vector>

#include "dualsim/rational.hpp"

namespace dualsim {

double falling_factorial(double a, unsigned k);
double rising_factorial(double a, unsigned k);
double binomial_coefficient(unsigned n, unsigned k);

// Monic Charlier polynomial, orthogonal against Poisson(alpha).
double charlier(unsigned n, double x, double alpha);

// Monic Meixner polynomial, orthogonal against NegBinomial(a, p).
double meixner(unsigned n, double x, double a, double p);

// Monic Krawtchouk polynomial, orthogonal against Binomial(trials, theta).
// The family has trials+1 members; n > trials is rejected. Built from the
// three-term recurrence obtained by Gram-Schmidt against the binomial law.
double krawtchouk(unsigned n, double x, unsigned trials, double theta);

// Recurrence coefficients a_k, b_k with p_{k+1} = (x - a_k) p_k - b_k p_{k-1}.
void krawtchouk_recurrence(unsigned trials, double theta, unsigned n_max,
                           std::vector<double>& a, std::vector<double>& b);

// Generating function of the monic Meixner family,
// e_t(x, a) = ((1-p+t)/(1-p+tp))^x ((1-p)/(1-p+tp))^a.
double meixner_generating(double t, unsigned x, double a, double p);

// Exact variants for the rational mode.
Rational falling_factorial(const Rational& a, unsigned k);
Rational rising_factorial(const Rational& a, unsigned k);
Rational charlier(unsigned n, const Rational& x, const Rational& alpha);
Rational meixner(unsigned n, const Rational& x, const Rational& a, const Rational& p);

// ---------------------------------------------------------------------------
// Discrete laws
// ---------------------------------------------------------------------------

struct Pmf {
    enum class Family { Poisson, NegBinomial, Binomial };

    Family family = Family::Poisson;
    double a = 1.0;      // Poisson mean / NB shape / Binomial trial count
    double p = 0.5;      // NB or Binomial success parameter (unused for Poisson)

    double operator()(std::uint64_t k) const;
    double mean() const;
    double variance() const;

    // Smallest L with P(X > L) below the tail tolerance.
    std::uint64_t support_bound(double tail = 1e-14) const;

    // Monic orthogonal polynomial of this law and its L2 norm squared.
    double orthopoly(unsigned n, double x) const;
    double orthopoly_norm_sq(unsigned n) const;
};

Pmf poisson_pmf(double mean);
Pmf neg_binomial_pmf(double a, double p);
Pmf binomial_pmf(unsigned trials, double theta);

// sum_k P_n(k) P_m(k) law(k); the cutoff extends past the 1e-14 mass tail
// until the moment-weighted terms themselves have died out
double orthogonality_quadrature(const Pmf& law, unsigned n, unsigned m);

}  // namespace dualsim
