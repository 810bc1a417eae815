#pragma once

// Finite measure on [0,1): finitely many atoms plus a piecewise-constant
// density on a uniform cell grid. Both the jump-rate integrals and the
// relocation sampling of the continuum process have closed forms in this
// family, so no rejection sampling is needed anywhere.

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dualsim/rng.hpp"

namespace dualsim {

class AlphaMeasure {
public:
    // levels[i] is the density value on [i/G, (i+1)/G); atoms are (coord, mass)
    AlphaMeasure(std::vector<double> levels, std::vector<std::pair<double, double>> atoms);

    static AlphaMeasure uniform(double total_mass, std::size_t grid = 1) {
        return AlphaMeasure(std::vector<double>(grid, total_mass), {});
    }

    double total() const { return total_; }
    std::size_t grid_size() const { return levels_.size(); }
    double level(std::size_t i) const { return levels_[i]; }
    const std::vector<std::pair<double, double>>& atoms() const { return atoms_; }

    // mass of [lo, hi)
    double interval_mass(double lo, double hi) const;
    // mass of the atom exactly at x (0 if none)
    double atom_mass_at(double x) const;
    // density-only mass of [lo, hi)
    double density_mass(double lo, double hi) const;

    // draw a point with law alpha / alpha(E)
    double sample(CounterRng& rng) const;
    // draw from the density part of [lo, hi), given positive mass there
    double sample_density_interval(double lo, double hi, CounterRng& rng) const;

private:
    std::vector<double> levels_;
    std::vector<std::pair<double, double>> atoms_;  // sorted by coordinate
    double density_total_ = 0.0;
    double total_ = 0.0;
};

inline AlphaMeasure::AlphaMeasure(std::vector<double> levels,
                                  std::vector<std::pair<double, double>> atoms)
    : levels_(std::move(levels)), atoms_(std::move(atoms)) {
    if (levels_.empty()) throw std::invalid_argument("AlphaMeasure: empty grid");
    const double width = 1.0 / static_cast<double>(levels_.size());
    for (double l : levels_) {
        if (l < 0.0) throw std::invalid_argument("AlphaMeasure: negative density level");
        density_total_ += l * width;
    }
    double atom_total = 0.0;
    for (auto& [x, m] : atoms_) {
        if (x < 0.0 || x >= 1.0)
            throw std::invalid_argument("AlphaMeasure: atom coordinate outside [0,1)");
        if (m <= 0.0) throw std::invalid_argument("AlphaMeasure: atom mass must be positive");
        atom_total += m;
    }
    std::sort(atoms_.begin(), atoms_.end());
    total_ = density_total_ + atom_total;
    if (total_ <= 0.0) throw std::invalid_argument("AlphaMeasure: total mass must be positive");
}

inline double AlphaMeasure::density_mass(double lo, double hi) const {
    if (hi <= lo) return 0.0;
    const double g = static_cast<double>(levels_.size());
    double mass = 0.0;
    for (std::size_t i = 0; i < levels_.size(); ++i) {
        const double a = static_cast<double>(i) / g;
        const double b = static_cast<double>(i + 1) / g;
        const double l = std::max(lo, a), h = std::min(hi, b);
        if (h > l) mass += levels_[i] * (h - l);
    }
    return mass;
}

inline double AlphaMeasure::interval_mass(double lo, double hi) const {
    double mass = density_mass(lo, hi);
    for (const auto& [x, m] : atoms_)
        if (x >= lo && x < hi) mass += m;
    return mass;
}

inline double AlphaMeasure::atom_mass_at(double x) const {
    for (const auto& [ax, m] : atoms_)
        if (ax == x) return m;
    return 0.0;
}

inline double AlphaMeasure::sample(CounterRng& rng) const {
    double u = rng.uniform() * total_;
    for (const auto& [x, m] : atoms_) {
        u -= m;
        if (u < 0.0) return x;
    }
    return sample_density_interval(0.0, 1.0, rng);
}

inline double AlphaMeasure::sample_density_interval(double lo, double hi,
                                                    CounterRng& rng) const {
    const double g = static_cast<double>(levels_.size());
    const double mass = density_mass(lo, hi);
    if (mass <= 0.0)
        throw std::runtime_error("AlphaMeasure: sampling from a null density interval");
    double u = rng.uniform() * mass;
    for (std::size_t i = 0; i < levels_.size(); ++i) {
        const double a = static_cast<double>(i) / g;
        const double b = static_cast<double>(i + 1) / g;
        const double l = std::max(lo, a), h = std::min(hi, b);
        if (h <= l) continue;
        const double cell_mass = levels_[i] * (h - l);
        if (u < cell_mass) return l + (h - l) * (u / cell_mass);
        u -= cell_mass;
    }
    // numerical slack: fall back to the last positive cell
    for (std::size_t i = levels_.size(); i-- > 0;) {
        const double a = static_cast<double>(i) / g;
        const double b = static_cast<double>(i + 1) / g;
        const double l = std::max(lo, a), h = std::min(hi, b);
        if (h > l && levels_[i] > 0.0) return l + 0.5 * (h - l);
    }
    throw std::runtime_error("AlphaMeasure: sampling failed");
}

}  // namespace dualsim
