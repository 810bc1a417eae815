#include "dualsim/gsip.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dualsim {

// ---------------------------------------------------------------------------
// ConductanceFn
// ---------------------------------------------------------------------------

ConductanceFn ConductanceFn::constant(double kappa) {
    if (kappa <= 0.0) throw std::invalid_argument("ConductanceFn: kappa must be positive");
    ConductanceFn c;
    c.constant_ = kappa;
    c.boundaries_ = {0.0, 1.0};
    c.d_ = {{kappa}};
    c.bound_ = kappa;
    return c;
}

ConductanceFn ConductanceFn::piecewise(std::vector<double> boundaries,
                                       std::vector<std::vector<double>> d) {
    if (boundaries.size() < 2 || boundaries.front() != 0.0 || boundaries.back() != 1.0)
        throw std::invalid_argument("ConductanceFn: boundaries must run from 0 to 1");
    for (std::size_t i = 1; i < boundaries.size(); ++i)
        if (!(boundaries[i - 1] < boundaries[i]))
            throw std::invalid_argument("ConductanceFn: boundaries must increase");
    const std::size_t r = boundaries.size() - 1;
    if (d.size() != r) throw std::invalid_argument("ConductanceFn: level matrix size");
    ConductanceFn c;
    for (std::size_t i = 0; i < r; ++i) {
        if (d[i].size() != r) throw std::invalid_argument("ConductanceFn: level matrix size");
        for (std::size_t j = 0; j < r; ++j) {
            if (d[i][j] < 0.0) throw std::invalid_argument("ConductanceFn: negative level");
            if (d[i][j] != d[j][i])
                throw std::invalid_argument("ConductanceFn: levels must be symmetric");
            c.bound_ = std::max(c.bound_, d[i][j]);
        }
    }
    c.boundaries_ = std::move(boundaries);
    c.d_ = std::move(d);
    return c;
}

std::size_t ConductanceFn::cell_of(double x) const {
    const auto it = std::upper_bound(boundaries_.begin(), boundaries_.end(), x);
    const std::size_t idx = static_cast<std::size_t>(it - boundaries_.begin());
    if (idx == 0 || idx >= boundaries_.size())
        throw std::out_of_range("ConductanceFn: point outside [0,1)");
    return idx - 1;
}

std::size_t ConductanceFn::cell_count() const { return boundaries_.size() - 1; }

double ConductanceFn::operator()(double x, double y) const {
    if (x == y) return 0.0;
    return d_[cell_of(x)][cell_of(y)];
}

// ---------------------------------------------------------------------------
// rates
// ---------------------------------------------------------------------------

namespace {

// overlap pieces of the alpha grid cells with the conductance partition
struct Segment {
    double lo, hi;
    double mass;       // alpha density mass of the piece
    std::size_t ccell;  // conductance cell containing it
};

std::vector<Segment> build_segments(const ConductanceFn& c, const AlphaMeasure& alpha) {
    std::vector<double> cuts = c.boundaries();
    const double g = static_cast<double>(alpha.grid_size());
    for (std::size_t i = 1; i < alpha.grid_size(); ++i)
        cuts.push_back(static_cast<double>(i) / g);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    std::vector<Segment> segs;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double lo = cuts[i], hi = cuts[i + 1];
        const double mass = alpha.density_mass(lo, hi);
        if (mass > 0.0) segs.push_back({lo, hi, mass, c.cell_of(lo)});
    }
    return segs;
}

struct FreshSampler {
    const ConductanceFn* c;
    const AlphaMeasure* alpha;
    std::vector<Segment> segments;

    // total weight of int c(x,.) alpha(.) with the atom at x removed
    double total_from(double x) const {
        const std::size_t from = c->cell_of(x);
        double total = 0.0;
        for (const auto& s : segments) total += c->level(from, s.ccell) * s.mass;
        for (const auto& [ax, m] : alpha->atoms())
            if (ax != x) total += c->level(from, c->cell_of(ax)) * m;
        return total;
    }

    double sample_from(double x, CounterRng& rng) const {
        const std::size_t from = c->cell_of(x);
        const double total = total_from(x);
        double u = rng.uniform() * total;
        for (const auto& [ax, m] : alpha->atoms()) {
            if (ax == x) continue;
            u -= c->level(from, c->cell_of(ax)) * m;
            if (u < 0.0) return ax;
        }
        for (const auto& s : segments) {
            const double w = c->level(from, s.ccell) * s.mass;
            u -= w;
            if (u < 0.0) return s.lo + (s.hi - s.lo) * rng.uniform();
        }
        // numerical slack: last positive component
        for (auto it = segments.rbegin(); it != segments.rend(); ++it)
            if (c->level(from, it->ccell) * it->mass > 0.0)
                return it->lo + (it->hi - it->lo) * rng.uniform();
        throw std::runtime_error("gsip: fresh relocation sampling failed");
    }
};

}  // namespace

JumpRates q_rates(const std::vector<double>& positions, const ConductanceFn& c,
                  const AlphaMeasure& alpha) {
    const std::size_t n = positions.size();
    FreshSampler sampler{&c, &alpha, build_segments(c, alpha)};
    JumpRates r;
    r.fresh.resize(n);
    r.per_particle.assign(n, 0.0);
    r.pairs.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        r.fresh[i] = sampler.total_from(positions[i]);
        r.per_particle[i] = r.fresh[i];
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double q = c(positions[i], positions[j]);
            r.pairs[i * n + j] = q;
            r.per_particle[i] += q;
        }
        r.total += r.per_particle[i];
    }
    return r;
}

// ---------------------------------------------------------------------------
// simulation
// ---------------------------------------------------------------------------

GsipResult labelled_gsip_simulate(std::vector<double> positions, const ConductanceFn& c,
                                  const AlphaMeasure& alpha, const GsipConfig& cfg) {
    if (cfg.t_end < 0.0) throw std::invalid_argument("gsip: negative end time");
    for (double x : positions)
        if (x < 0.0 || x >= 1.0)
            throw std::invalid_argument("gsip: particle outside [0,1)");

    CounterRng rng(cfg.seed, cfg.stream);
    FreshSampler sampler{&c, &alpha, build_segments(c, alpha)};
    const std::size_t n = positions.size();

    GsipResult out;
    out.time_reached = cfg.t_end;
    double t = 0.0;
    std::vector<double> z(n), fresh(n);
    while (n > 0) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            fresh[i] = sampler.total_from(positions[i]);
            z[i] = fresh[i];
            for (std::size_t j = 0; j < n; ++j)
                if (j != i) z[i] += c(positions[i], positions[j]);
            total += z[i];
        }
        if (total <= 0.0) break;  // frozen state
        const double dt = rng.exponential(total);
        if (t + dt > cfg.t_end) break;
        t += dt;
        if (out.events >= cfg.max_events) {
            out.truncated = true;
            out.time_reached = t;
            break;
        }
        ++out.events;

        const std::size_t i = rng.categorical(z.data(), n, total);
        double u = rng.uniform() * z[i];
        double destination = -1.0;
        bool piled = false;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            u -= c(positions[i], positions[j]);
            if (u < 0.0) {
                destination = positions[j];
                piled = true;
                break;
            }
        }
        if (destination < 0.0) destination = sampler.sample_from(positions[i], rng);
        positions[i] = destination;
        if (cfg.record_events) out.log.push_back({t, i, destination, piled});
    }
    out.positions = std::move(positions);
    return out;
}

CountingMeasure gsip_simulate(const CountingMeasure& eta0, const ConductanceFn& c,
                              const AlphaMeasure& alpha, const GsipConfig& cfg) {
    if (eta0.space() != Space::Continuum)
        throw std::invalid_argument("gsip: continuum configuration required");
    const auto result = labelled_gsip_simulate(eta0.points(), c, alpha, cfg);
    return CountingMeasure::continuum(result.positions);
}

// ---------------------------------------------------------------------------
// point process samplers
// ---------------------------------------------------------------------------

CountingMeasure sample_pascal(const AlphaMeasure& alpha, double p, std::uint64_t seed,
                              std::uint64_t stream) {
    if (p <= 0.0 || p > 0.95)
        throw std::invalid_argument("sample_pascal: need p in (0, 0.95]");
    CounterRng rng(seed, stream);
    const double log_term = -std::log1p(-p);
    const std::uint64_t piles = rng.poisson(alpha.total() * log_term);
    std::vector<double> points;
    for (std::uint64_t k = 0; k < piles; ++k) {
        const double location = alpha.sample(rng);
        // logarithmic multiplicity by direct inverse-CDF summation
        double u = rng.uniform();
        std::uint64_t mult = 1;
        double mass = p / log_term;
        while (u > mass && mult < 100000) {
            ++mult;
            u -= mass;
            mass = mass * p * static_cast<double>(mult - 1) / static_cast<double>(mult);
        }
        for (std::uint64_t j = 0; j < mult; ++j) points.push_back(location);
    }
    return CountingMeasure::continuum(std::move(points));
}

CountingMeasure sample_poisson(const AlphaMeasure& alpha, std::uint64_t seed,
                               std::uint64_t stream) {
    CounterRng rng(seed, stream);
    const std::uint64_t k = rng.poisson(alpha.total());
    std::vector<double> points;
    points.reserve(k);
    for (std::uint64_t i = 0; i < k; ++i) points.push_back(alpha.sample(rng));
    return CountingMeasure::continuum(std::move(points));
}

// ---------------------------------------------------------------------------
// reduction to the discrete system
// ---------------------------------------------------------------------------

SiteSystem reduce_to_discrete(const ConductanceFn& c, const AlphaMeasure& alpha) {
    const std::size_t r = c.cell_count();
    if (r < 2)
        throw std::invalid_argument("reduce_to_discrete: need at least two cells");
    SiteSystem sys;
    sys.m = static_cast<int>(r);
    sys.sigma = 1;
    sys.c.assign(r, std::vector<double>(r, 0.0));
    sys.alpha.resize(r);
    for (std::size_t i = 0; i < r; ++i) {
        sys.alpha[i] = alpha.interval_mass(c.boundaries()[i], c.boundaries()[i + 1]);
        for (std::size_t j = 0; j < r; ++j)
            if (i != j) sys.c[i][j] = c.level(i, j);
    }
    sys.validate();
    return sys;
}

std::vector<Cell> partition_cells(const ConductanceFn& c) {
    std::vector<Cell> cells;
    for (std::size_t i = 0; i < c.cell_count(); ++i)
        cells.push_back(Cell::interval(c.boundaries()[i], c.boundaries()[i + 1]));
    return cells;
}

}  // namespace dualsim
