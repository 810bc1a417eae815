#pragma once

// Exact finite-state engines for the three interacting particle systems on a
// finite site set: exclusion (sigma = -1), independent walkers (sigma = 0)
// and inclusion (sigma = +1). Sector generators, uniformized semigroups,
// labelled n-particle dynamics, reversible product measures, duality
// functions and the consistency commutator.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dualsim/oracle.hpp"
#include "dualsim/orthopoly.hpp"
#include "dualsim/pointconfig.hpp"
#include "dualsim/rational.hpp"
#include "dualsim/vec.hpp"

namespace dualsim {

// Sectors above this size are refused; keeps every computation exact and
// desk-sized.
inline constexpr std::size_t kSectorStateLimit = 200000;

struct SiteSystem {
    int m = 0;                       // number of sites
    std::vector<std::vector<double>> c;  // symmetric conductances, zero diagonal
    std::vector<double> alpha;       // positive site weights; integers if sigma = -1
    int sigma = 0;                   // -1 exclusion, 0 independent, +1 inclusion

    void validate() const;
    double conductance(int x, int y) const { return c[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)]; }
};

// Enumeration of the n-particle sector: occupation vectors with total n
// (and eta <= alpha componentwise for exclusion), lexicographic order.
class SectorEnumeration {
public:
    SectorEnumeration(const SiteSystem& sys, unsigned n);

    unsigned particles() const { return n_; }
    std::size_t size() const { return configs_.size(); }
    const std::vector<int>& config(std::size_t i) const { return configs_[i]; }
    std::size_t index_of(const std::vector<int>& config) const;

private:
    unsigned n_ = 0;
    std::vector<std::vector<int>> configs_;
    std::map<std::vector<int>, std::size_t> index_;
};

struct GeneratorMatrix {
    std::shared_ptr<const SectorEnumeration> sector;  // null for labelled generators
    vec::CsrMatrix q;            // rates; diagonal = -(row sum of off-diagonals)
    double max_exit_rate = 0.0;  // max |diagonal|
};

// rate of eta -> eta - delta_x + delta_y is c_xy * eta_x * (alpha_y + sigma*eta_y)
GeneratorMatrix build_generator(const SiteSystem& sys, unsigned n);

// Labelled dynamics on tuples in E^n (row index encodes the tuple in base m):
// particle i at x_i jumps to y at rate c(x_i, y) (alpha_y + sigma * #{j != i : x_j = y}).
GeneratorMatrix build_labelled_generator(const SiteSystem& sys, unsigned n);

std::size_t tuple_index(const std::vector<int>& tuple, int m);
std::vector<int> index_tuple(std::size_t index, int m, unsigned n);

// (e^{tQ} v) by uniformization, Poisson tail below 1e-14. With transpose=true
// applies e^{tQ^T}, which evolves distributions (row vectors).
std::vector<double> semigroup_apply(const GeneratorMatrix& gen, double t,
                                    const std::vector<double>& v, bool transpose = false);

// Lowering operator as a sector-(n-1) -> sector-n matrix: (A f)(eta) = sum_x eta_x f(eta - delta_x).
vec::CsrMatrix lowering_matrix(const SiteSystem& sys, unsigned n);

// max-norm of L_{n-1} A - A L_n; zero for consistent dynamics
double consistency_commutator(const SiteSystem& sys, unsigned n);

// exact variant on rational rates (conductances given as rationals)
Rational consistency_commutator_exact(const SiteSystem& sys,
                                      const std::vector<std::vector<Rational>>& c_exact,
                                      unsigned n);

// Reversible product measure rho_theta.
struct ReversibleMeasure {
    double theta = 0.0;
    std::vector<Pmf> marginals;  // one per site

    double mass(const std::vector<int>& config) const;
    double log_mass(const std::vector<int>& config) const;
};

ReversibleMeasure reversible_measure(const SiteSystem& sys, double theta);

// rho_theta conditioned on the n-particle sector, normalized
std::vector<double> sector_distribution(const SiteSystem& sys, double theta,
                                        const SectorEnumeration& sector);

enum class DualityKind { Cheap, Classical, Orthogonal };

// Duality function evaluator D(xi, eta) on occupation vectors.
std::function<double(const std::vector<int>&, const std::vector<int>&)>
duality_function(const SiteSystem& sys, double theta, DualityKind kind);

struct DualityCheckResult {
    double lhs = 0.0;   // E_eta[D(xi, eta_t)]
    double rhs = 0.0;   // E_xi[D(xi_t, eta)]
    double abs_diff = 0.0;
};

DualityCheckResult check_duality(const SiteSystem& sys, double theta, DualityKind kind,
                                 double t, const std::vector<int>& xi,
                                 const std::vector<int>& eta);

enum class IntertwinerKind { Classical, Orthogonal };

struct IntertwiningCheckResult {
    double max_abs_deviation = 0.0;
    double lhs_at_worst = 0.0;
    double rhs_at_worst = 0.0;
    std::size_t states_checked = 0;
};

// Compares P_t K_n(f, .)(eta) with K_n(p_t^[n] f, eta) over every eta in the
// total-particle sector, where K_n is the falling-factorial intertwiner in
// classical mode and the orthogonal projection (via the moment oracle, with
// the theta-reversible measure) in orthogonal mode.
IntertwiningCheckResult check_intertwining(const SiteSystem& sys, unsigned n,
                                           unsigned total_particles, double t,
                                           const SymmetricFn& f, IntertwinerKind kind,
                                           double theta = 1.0);

// Evaluate the generalized orthogonal polynomial I_n(f, .) of a symmetric
// function f on E^n at an occupation vector, using the Gram-Schmidt oracle
// over the theta-reversible marginals.
MultiPoly orthogonal_polynomial_of(const SiteSystem& sys, double theta, unsigned n,
                                   const SymmetricFn& f);

// exact detailed balance residual max over sector pairs:
// |rho(eta) q(eta,eta') - rho(eta') q(eta',eta)|
double detailed_balance_residual(const SiteSystem& sys, double theta, unsigned n);

// Exact-rational detailed balance over a sector. The theta-dependent factor
// of rho is constant within a sector, so the residual is theta-free.
Rational detailed_balance_residual_exact(const SiteSystem& sys,
                                         const std::vector<std::vector<Rational>>& c_exact,
                                         unsigned n);

}  // namespace dualsim
