#pragma once

// Small statistics toolbox for the Monte Carlo acceptance checks.

#include <cstddef>
#include <vector>

namespace dualsim {

// Regularized upper incomplete gamma Q(a, x) = Gamma(a,x)/Gamma(a).
double gamma_q(double a, double x);

// Chi-square upper tail probability for k degrees of freedom.
double chi_square_sf(double stat, unsigned dof);

// Wilson-Hilferty normal approximation of a chi-square statistic; the value
// is comparable with the |z| <= 3 Monte Carlo acceptance rule.
double chi_square_z(double stat, unsigned dof);

struct MeanVar {
    std::size_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;  // sum of squared deviations

    void add(double x) {
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }
    double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
    double std_error() const;
};

MeanVar summarize(const std::vector<double>& xs);

// Pearson chi-square of observed counts against expected counts; bins with
// expected mass below min_expected are pooled from the right.
struct ChiSquare {
    double stat = 0.0;
    unsigned dof = 0;
    double p_value = 1.0;
    double z = 0.0;
};
ChiSquare chi_square_gof(const std::vector<double>& observed,
                         const std::vector<double>& expected,
                         double min_expected = 5.0);

double pearson_correlation(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace dualsim
