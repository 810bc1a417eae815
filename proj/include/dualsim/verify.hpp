#pragma once

// Verification harness: each routine computes an intertwining, duality,
// orthogonality or reversibility identity two independent ways (exact
// engines, moment oracle, closed forms, or Monte Carlo with error control)
// and reports the comparison.

#include <cstdint>
#include <vector>

#include "dualsim/discrete.hpp"
#include "dualsim/gsip.hpp"
#include "dualsim/oracle.hpp"
#include "dualsim/pointconfig.hpp"
#include "dualsim/report.hpp"

namespace dualsim {

// Monte Carlo check of the classical intertwining for the continuum process:
// the mean of the n-th factorial integral of f over configuration
// trajectories against the sum over injective start tuples of labelled
// n-particle expectations.
struct McIntertwiningOptions {
    unsigned n = 1;
    double t = 1.0;
    std::size_t samples = 10000;
    std::uint64_t seed = 1;
};
VerificationReport mc_classical_intertwining_gsip(const CountingMeasure& eta0,
                                                  const SymmetricFn& f,
                                                  const ConductanceFn& c,
                                                  const AlphaMeasure& alpha,
                                                  const McIntertwiningOptions& opt);

// Exact discrete intertwining (classical or orthogonal mode), max deviation
// over all states of the total-particle sector.
VerificationReport exact_intertwining_discrete(const SiteSystem& sys, unsigned n,
                                               unsigned total_particles, double t,
                                               const SymmetricFn& f, IntertwinerKind kind,
                                               double theta, double tolerance);

// Self-duality |E_eta D(xi, eta_t) - E_xi D(xi_t, eta)| via exact semigroups.
VerificationReport duality_check(const SiteSystem& sys, double theta, DualityKind kind,
                                 double t, const std::vector<int>& xi,
                                 const std::vector<int>& eta, double tolerance);

// Consistency commutator norm for one system.
VerificationReport commutator_check(const SiteSystem& sys, unsigned n, double tolerance);

// Oracle projections against products of univariate Meixner polynomials on
// Pascal samples, plus a Monte Carlo orthogonality screen across degrees.
std::vector<VerificationReport> meixner_product_check(const AlphaMeasure& alpha, double p,
                                                      const std::vector<Cell>& cells,
                                                      const std::vector<unsigned>& degrees,
                                                      std::size_t configs,
                                                      std::size_t mc_samples,
                                                      std::uint64_t seed);

// E[I_n(f)^2] from moments against the lambda_n partition-sum measure scaled
// by p^n n!/(1-p)^(2n); all closed form. Includes a cross-degree zero check.
std::vector<VerificationReport> lambda_orthogonality_check(
    const AlphaMeasure& alpha, double p, const std::vector<Cell>& cells,
    const std::vector<unsigned>& degrees);

// Poisson case: oracle projections against Charlier products and the
// n! int f g d lambda^n orthogonality constants.
std::vector<VerificationReport> charlier_product_check(const AlphaMeasure& intensity,
                                                       const std::vector<Cell>& cells,
                                                       const std::vector<unsigned>& degrees,
                                                       std::size_t configs,
                                                       std::uint64_t seed);

enum class IndependentSampler { Poisson, Pascal };

// I_{d1+d2}(f1 (x) f2) = I_{d1}(f1) I_{d2}(f2) pointwise on sampled
// configurations of a completely independent process.
VerificationReport factorization_check(IndependentSampler sampler,
                                       const AlphaMeasure& alpha, double p,
                                       const std::vector<Cell>& cells,
                                       const std::vector<unsigned>& degrees_left,
                                       const std::vector<unsigned>& degrees_right,
                                       std::size_t configs, std::uint64_t seed);

// Pascal sampler diagnostics: per-cell negative-binomial marginals (chi
// square and the mass at zero), a pairwise independence screen, and the
// Laplace functional against its closed form.
std::vector<VerificationReport> pascal_sampler_check(
    const AlphaMeasure& alpha, double p, const std::vector<Cell>& cells,
    const std::vector<std::vector<double>>& laplace_levels, std::size_t samples,
    std::uint64_t seed);

// Stationarity of the Pascal law under the continuum dynamics: per-cell
// chi-square at time t plus pairwise correlation screen, and exact detailed
// balance of the reduced discrete system.
std::vector<VerificationReport> stationarity_check_gsip(const AlphaMeasure& alpha, double p,
                                                        const ConductanceFn& c, double t,
                                                        std::size_t samples,
                                                        std::uint64_t seed);

// Cell-count law of the continuum process at time t against the exact
// discrete semigroup of the reduced system, per-state z scores.
std::vector<VerificationReport> gsip_reduction_check(const AlphaMeasure& alpha,
                                                     const ConductanceFn& c,
                                                     const std::vector<int>& initial_counts,
                                                     double t, std::size_t samples,
                                                     std::uint64_t seed);

}  // namespace dualsim
