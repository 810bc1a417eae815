#pragma once

// Continuum inclusion process on [0,1): exact jump-hold simulation (labelled
// and unlabelled), Pascal and Poisson point-process sampling, and the
// reduction to the discrete inclusion process over a cell partition.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dualsim/alpha_measure.hpp"
#include "dualsim/discrete.hpp"
#include "dualsim/pointconfig.hpp"
#include "dualsim/rng.hpp"

namespace dualsim {

// Symmetric bounded conductance c(x,y) with vanishing diagonal: either a
// constant kappa or a piecewise-constant matrix over an interval partition.
class ConductanceFn {
public:
    static ConductanceFn constant(double kappa);
    // boundaries 0 = b_0 < b_1 < ... < b_r = 1; d is r x r symmetric
    static ConductanceFn piecewise(std::vector<double> boundaries,
                                   std::vector<std::vector<double>> d);

    double operator()(double x, double y) const;  // 0 when x == y
    double bound() const { return bound_; }
    bool is_constant() const { return constant_.has_value(); }
    double kappa() const { return *constant_; }
    std::size_t cell_of(double x) const;
    std::size_t cell_count() const;
    const std::vector<double>& boundaries() const { return boundaries_; }
    double level(std::size_t i, std::size_t j) const { return d_[i][j]; }

private:
    std::optional<double> constant_;
    std::vector<double> boundaries_;
    std::vector<std::vector<double>> d_;
    double bound_ = 0.0;
};

struct GsipConfig {
    double t_end = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;       // trajectory substream
    std::uint64_t max_events = 10000000;
    bool record_events = false;
};

struct GsipEvent {
    double time;
    std::size_t particle;
    double destination;
    bool piled;  // landed on another particle rather than a fresh draw
};

struct GsipResult {
    std::vector<double> positions;  // labelled final state
    double time_reached = 0.0;
    std::uint64_t events = 0;
    bool truncated = false;         // max_events hit before t_end
    std::vector<GsipEvent> log;
};

struct JumpRates {
    std::vector<double> fresh;         // q_i0 = int c(x_i, y) alpha(dy)
    std::vector<double> per_particle;  // z_i
    std::vector<double> pairs;         // q_ij, row-major, zero diagonal
    double total = 0.0;                // z = Q(eta, E)
    double pair(std::size_t i, std::size_t j) const { return pairs[i * fresh.size() + j]; }
};

// per-particle jump rates of the current configuration
JumpRates q_rates(const std::vector<double>& positions, const ConductanceFn& c,
                  const AlphaMeasure& alpha);

// labelled trajectory; forgetting labels gives the configuration process
GsipResult labelled_gsip_simulate(std::vector<double> positions, const ConductanceFn& c,
                                  const AlphaMeasure& alpha, const GsipConfig& cfg);

// unlabelled wrapper returning the counting measure at t_end
CountingMeasure gsip_simulate(const CountingMeasure& eta0, const ConductanceFn& c,
                              const AlphaMeasure& alpha, const GsipConfig& cfg);

// Pascal point process with parameters alpha and p: Poisson number of
// logarithmic-multiplicity piles at alpha-distributed locations.
CountingMeasure sample_pascal(const AlphaMeasure& alpha, double p, std::uint64_t seed,
                              std::uint64_t stream = 0);

// Poisson point process with intensity alpha.
CountingMeasure sample_poisson(const AlphaMeasure& alpha, std::uint64_t seed,
                               std::uint64_t stream = 0);

// Discrete inclusion system carried by cell counts when c is piecewise
// constant over the same partition.
SiteSystem reduce_to_discrete(const ConductanceFn& c, const AlphaMeasure& alpha);

// cells of a partition as pointconfig cells
std::vector<Cell> partition_cells(const ConductanceFn& c);

}  // namespace dualsim
