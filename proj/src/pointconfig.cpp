#include "dualsim/pointconfig.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace dualsim {

// ---------------------------------------------------------------------------
// Cell
// ---------------------------------------------------------------------------

Cell Cell::interval(double lo, double hi) {
    if (!(lo < hi) || lo < 0.0 || hi > 1.0)
        throw std::invalid_argument("Cell: need 0 <= lo < hi <= 1");
    Cell c;
    c.space = Space::Continuum;
    c.lo = lo;
    c.hi = hi;
    return c;
}

Cell Cell::of_sites(std::vector<int> sites) {
    if (sites.empty()) throw std::invalid_argument("Cell: empty site set");
    Cell c;
    c.space = Space::Discrete;
    c.sites = std::move(sites);
    std::sort(c.sites.begin(), c.sites.end());
    return c;
}

bool Cell::contains(double point) const {
    if (space == Space::Continuum) return point >= lo && point < hi;
    const int s = static_cast<int>(point);
    return std::binary_search(sites.begin(), sites.end(), s);
}

// ---------------------------------------------------------------------------
// CountingMeasure
// ---------------------------------------------------------------------------

CountingMeasure CountingMeasure::empty(Space s) {
    CountingMeasure m;
    m.space_ = s;
    return m;
}

CountingMeasure CountingMeasure::discrete(const std::vector<int>& sites) {
    CountingMeasure m;
    m.space_ = Space::Discrete;
    m.pts_.reserve(sites.size());
    for (int s : sites) {
        if (s < 0) throw std::invalid_argument("CountingMeasure: negative site");
        m.pts_.push_back(static_cast<double>(s));
    }
    std::sort(m.pts_.begin(), m.pts_.end());
    return m;
}

CountingMeasure CountingMeasure::continuum(std::vector<double> coords) {
    CountingMeasure m;
    m.space_ = Space::Continuum;
    for (double c : coords)
        if (c < 0.0 || c >= 1.0)
            throw std::invalid_argument("CountingMeasure: coordinate outside [0,1)");
    m.pts_ = std::move(coords);
    std::sort(m.pts_.begin(), m.pts_.end());
    return m;
}

CountingMeasure CountingMeasure::from_occupation(const std::vector<int>& occupation) {
    std::vector<int> sites;
    for (int x = 0; x < static_cast<int>(occupation.size()); ++x) {
        if (occupation[x] < 0)
            throw std::invalid_argument("CountingMeasure: negative occupation");
        for (int k = 0; k < occupation[x]; ++k) sites.push_back(x);
    }
    return discrete(sites);
}

std::size_t CountingMeasure::count_in(const Cell& cell) const {
    std::size_t k = 0;
    for (double p : pts_) k += cell.contains(p) ? 1u : 0u;
    return k;
}

std::vector<int> CountingMeasure::occupation(int num_sites) const {
    if (space_ != Space::Discrete)
        throw std::logic_error("CountingMeasure: occupation needs a discrete space");
    std::vector<int> occ(static_cast<std::size_t>(num_sites), 0);
    for (double p : pts_) {
        const int s = static_cast<int>(p);
        if (s >= num_sites) throw std::out_of_range("CountingMeasure: site out of range");
        ++occ[static_cast<std::size_t>(s)];
    }
    return occ;
}

CountingMeasure CountingMeasure::without(std::size_t index) const {
    if (index >= pts_.size()) throw std::out_of_range("CountingMeasure: bad index");
    CountingMeasure m = *this;
    m.pts_.erase(m.pts_.begin() + static_cast<std::ptrdiff_t>(index));
    return m;
}

CountingMeasure CountingMeasure::with(double point) const {
    CountingMeasure m = *this;
    m.pts_.insert(std::lower_bound(m.pts_.begin(), m.pts_.end(), point), point);
    return m;
}

std::string CountingMeasure::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (double p : pts_) {
        if (space_ == Space::Discrete)
            arr.push_back(static_cast<int>(p));
        else
            arr.push_back(p);
    }
    return arr.dump();
}

CountingMeasure CountingMeasure::from_json(const std::string& text, Space space) {
    const auto arr = nlohmann::json::parse(text);
    if (!arr.is_array()) throw std::invalid_argument("CountingMeasure: expected array");
    if (space == Space::Discrete) {
        std::vector<int> sites;
        for (const auto& v : arr) sites.push_back(v.get<int>());
        return discrete(sites);
    }
    std::vector<double> coords;
    for (const auto& v : arr) coords.push_back(v.get<double>());
    return continuum(std::move(coords));
}

// ---------------------------------------------------------------------------
// SymmetricFn
// ---------------------------------------------------------------------------

SymmetricFn SymmetricFn::constant(unsigned arity, double value) {
    SymmetricFn f;
    f.arity_ = arity;
    f.bound_ = std::fabs(value);
    f.eval_ = [value](const double*, std::size_t) { return value; };
    return f;
}

SymmetricFn SymmetricFn::tensor_indicator(std::vector<Cell> cells,
                                          std::vector<unsigned> degrees) {
    if (cells.size() != degrees.size())
        throw std::invalid_argument("tensor_indicator: cells/degrees mismatch");
    SymmetricFn f;
    f.cells_ = std::move(cells);
    f.degrees_ = std::move(degrees);
    unsigned arity = 0;
    for (std::size_t i = 0; i < f.degrees_.size(); ++i) {
        for (unsigned d = 0; d < f.degrees_[i]; ++d)
            f.slot_cells_.push_back(static_cast<unsigned>(i));
        arity += f.degrees_[i];
    }
    f.arity_ = arity;
    f.bound_ = 1.0;
    const auto cellsp = std::make_shared<std::vector<Cell>>(f.cells_);
    const auto slots = std::make_shared<std::vector<unsigned>>(f.slot_cells_);
    f.eval_ = [cellsp, slots](const double* pts, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i)
            if (!(*cellsp)[(*slots)[i]].contains(pts[i])) return 0.0;
        return 1.0;
    };
    return f;
}

SymmetricFn SymmetricFn::generic(unsigned arity, double bound, Evaluator eval) {
    if (!(bound > 0.0) || !std::isfinite(bound))
        throw std::invalid_argument("SymmetricFn: generic evaluator needs a finite bound");
    SymmetricFn f;
    f.arity_ = arity;
    f.bound_ = bound;
    f.eval_ = std::move(eval);
    return f;
}

double SymmetricFn::eval(const std::vector<double>& pts) const {
    if (pts.size() != arity_) throw std::invalid_argument("SymmetricFn: arity mismatch");
    return eval_(pts.data(), pts.size());
}

// ---------------------------------------------------------------------------
// set partitions
// ---------------------------------------------------------------------------

std::vector<SetPartition> set_partitions(unsigned n) {
    if (n < 1 || n > 10) throw std::invalid_argument("set_partitions: need 1 <= n <= 10");
    std::vector<SetPartition> out;
    std::vector<unsigned> rgs(n, 0);  // restricted growth string
    while (true) {
        SetPartition p;
        p.n = n;
        unsigned blocks = *std::max_element(rgs.begin(), rgs.end()) + 1;
        p.blocks.assign(blocks, {});
        for (unsigned i = 0; i < n; ++i) p.blocks[rgs[i]].push_back(i);
        out.push_back(std::move(p));
        // next restricted growth string
        int i = static_cast<int>(n) - 1;
        for (; i > 0; --i) {
            unsigned prefix_max = 0;
            for (int j = 0; j < i; ++j) prefix_max = std::max(prefix_max, rgs[j]);
            if (rgs[i] <= prefix_max) {
                ++rgs[i];
                std::fill(rgs.begin() + i + 1, rgs.end(), 0);
                break;
            }
        }
        if (i == 0) break;
    }
    return out;
}

SymmetricFn collapse(const SymmetricFn& f, const SetPartition& sigma) {
    if (sigma.n != f.arity()) throw std::invalid_argument("collapse: arity mismatch");
    const unsigned k = sigma.block_count();

    if (f.is_tensor()) {
        // a block must draw all its slots from one cell, otherwise the
        // collapsed indicator is identically zero (cells are disjoint)
        std::vector<Cell> cells;
        bool zero = f.tensor_zero_;
        for (const auto& block : sigma.blocks) {
            const unsigned c0 = f.slot_cells()[block.front()];
            for (unsigned slot : block)
                if (f.slot_cells()[slot] != c0) zero = true;
            if (!zero) cells.push_back(f.cells()[c0]);
        }
        if (zero) {
            SymmetricFn z = SymmetricFn::constant(k, 0.0);
            z.bound_ = f.bound();
            z.tensor_zero_ = true;
            return z;
        }
        return SymmetricFn::tensor_indicator(std::move(cells),
                                             std::vector<unsigned>(k, 1));
    }

    auto slot_block = std::make_shared<std::vector<unsigned>>(sigma.n);
    for (unsigned b = 0; b < k; ++b)
        for (unsigned slot : sigma.blocks[b]) (*slot_block)[slot] = b;
    const unsigned full_arity = f.arity();
    auto inner = std::make_shared<SymmetricFn>(f);
    return SymmetricFn::generic(
        k, f.bound(), [slot_block, inner, full_arity](const double* pts, std::size_t) {
            std::vector<double> full(full_arity);
            for (unsigned i = 0; i < full_arity; ++i) full[i] = pts[(*slot_block)[i]];
            return inner->eval(full.data());
        });
}

// ---------------------------------------------------------------------------
// integrals
// ---------------------------------------------------------------------------

namespace {

constexpr std::size_t kMaxEnumerationPoints = 64;

void check_enumeration_size(const CountingMeasure& eta) {
    if (eta.total() > kMaxEnumerationPoints)
        throw std::invalid_argument("integral: configuration too large to enumerate");
}

// sum of f over injective ordered index tuples, depth-first
double injective_sum(const std::vector<double>& pts, unsigned n, const SymmetricFn& f,
                     std::vector<double>& buf, std::uint64_t used, unsigned depth) {
    if (depth == n) return f.eval(buf.data());
    double acc = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const std::uint64_t bit = 1ull << i;
        if (used & bit) continue;
        buf[depth] = pts[i];
        acc += injective_sum(pts, n, f, buf, used | bit, depth + 1);
    }
    return acc;
}

double product_sum(const std::vector<double>& pts, unsigned n, const SymmetricFn& f,
                   std::vector<double>& buf, unsigned depth) {
    if (depth == n) return f.eval(buf.data());
    double acc = 0.0;
    for (double p : pts) {
        buf[depth] = p;
        acc += product_sum(pts, n, f, buf, depth + 1);
    }
    return acc;
}

}  // namespace

double factorial_integral(const CountingMeasure& eta, unsigned n, const SymmetricFn& f) {
    if (f.arity() != n) throw std::invalid_argument("factorial_integral: arity mismatch");
    if (n == 0) return f.eval(nullptr);
    if (n > eta.total()) return 0.0;  // empty sum
    check_enumeration_size(eta);
    std::vector<double> buf(n);
    return injective_sum(eta.points(), n, f, buf, 0, 0);
}

double product_integral(const CountingMeasure& eta, unsigned n, const SymmetricFn& f) {
    if (f.arity() != n) throw std::invalid_argument("product_integral: arity mismatch");
    if (n == 0) return f.eval(nullptr);
    if (eta.total() == 0) return 0.0;
    check_enumeration_size(eta);
    std::vector<double> buf(n);
    return product_sum(eta.points(), n, f, buf, 0);
}

double k_transform(const CountingMeasure& eta,
                   const std::function<double(const CountingMeasure&)>& big_f,
                   unsigned depth_limit) {
    check_enumeration_size(eta);
    double acc = big_f(CountingMeasure::empty(eta.space()));
    const unsigned top = std::min<unsigned>(depth_limit, static_cast<unsigned>(eta.total()));
    std::vector<std::size_t> idx;
    // 1/n! times the injective-tuple sum equals the plain sum over index
    // subsets, so enumerate combinations
    std::function<void(std::size_t, unsigned, unsigned)> rec =
        [&](std::size_t start, unsigned depth, unsigned n) {
            if (depth == n) {
                std::vector<double> chosen;
                chosen.reserve(n);
                for (std::size_t i : idx) chosen.push_back(eta.point(i));
                CountingMeasure sub = eta.space() == Space::Discrete
                                          ? CountingMeasure::discrete(std::vector<int>(
                                                chosen.begin(), chosen.end()))
                                          : CountingMeasure::continuum(chosen);
                acc += big_f(sub);
                return;
            }
            for (std::size_t i = start; i < eta.total(); ++i) {
                idx.push_back(i);
                rec(i + 1, depth + 1, n);
                idx.pop_back();
            }
        };
    for (unsigned n = 1; n <= top; ++n) rec(0, 0, n);
    return acc;
}

double lowering(const CountingMeasure& eta,
                const std::function<double(const CountingMeasure&)>& big_f) {
    double acc = 0.0;
    for (std::size_t i = 0; i < eta.total(); ++i) acc += big_f(eta.without(i));
    return acc;
}

double monomial_via_factorials(const CountingMeasure& eta, unsigned n,
                               const SymmetricFn& f) {
    if (f.arity() != n) throw std::invalid_argument("monomial_via_factorials: arity mismatch");
    if (n == 0) return f.eval(nullptr);
    double acc = 0.0;
    for (const auto& sigma : set_partitions(n))
        acc += factorial_integral(eta, sigma.block_count(), collapse(f, sigma));
    return acc;
}

double factorial_via_monomials(const CountingMeasure& eta, unsigned n,
                               const SymmetricFn& f) {
    if (f.arity() != n) throw std::invalid_argument("factorial_via_monomials: arity mismatch");
    if (n == 0) return f.eval(nullptr);
    double acc = 0.0;
    for (const auto& sigma : set_partitions(n)) {
        double coeff = 1.0;
        for (const auto& block : sigma.blocks) {
            const auto sz = static_cast<unsigned>(block.size());
            double fac = 1.0;  // (|A|-1)!
            for (unsigned i = 2; i < sz; ++i) fac *= static_cast<double>(i);
            coeff *= (sz % 2 == 0 ? -1.0 : 1.0) * fac;
        }
        acc += coeff * product_integral(eta, sigma.block_count(), collapse(f, sigma));
    }
    return acc;
}

// ---------------------------------------------------------------------------
// lambda_n
// ---------------------------------------------------------------------------

namespace {

double cell_alpha_mass(const AlphaMeasure& alpha, const Cell& cell) {
    if (cell.space != Space::Continuum)
        throw std::invalid_argument("lambda_n: continuum cells required");
    return alpha.interval_mass(cell.lo, cell.hi);
}

}  // namespace

double lambda_n_integral(const AlphaMeasure& alpha, unsigned n, const SymmetricFn& f) {
    if (f.arity() != n) throw std::invalid_argument("lambda_n_integral: arity mismatch");
    if (n == 0) return f.eval(nullptr);
    if (!f.is_tensor())
        throw std::invalid_argument(
            "lambda_n_integral: need a tensor indicator (closed-form alpha integrals)");
    double acc = 0.0;
    for (const auto& sigma : set_partitions(n)) {
        const SymmetricFn g = collapse(f, sigma);
        double weight = 1.0;
        for (const auto& block : sigma.blocks)
            for (std::size_t i = 2; i < block.size(); ++i)
                weight *= static_cast<double>(i);
        double integral;
        if (g.cells().empty()) {
            integral = 0.0;  // collapsed to zero
        } else {
            integral = 1.0;
            for (const auto& cell : g.cells()) integral *= cell_alpha_mass(alpha, cell);
        }
        acc += weight * integral;
    }
    return acc;
}

double lambda_n_integral(const AlphaMeasure& alpha, const CellSymbolicFn& f) {
    if (f.arity == 0) return f.eval_labels({});
    const unsigned num_cells = static_cast<unsigned>(f.cells.size());
    std::vector<double> masses(num_cells + 1);
    double inside = 0.0;
    for (unsigned c = 0; c < num_cells; ++c) {
        masses[c] = cell_alpha_mass(alpha, f.cells[c]);
        inside += masses[c];
    }
    masses[num_cells] = std::max(0.0, alpha.total() - inside);  // label "outside"

    double acc = 0.0;
    for (const auto& sigma : set_partitions(f.arity)) {
        double weight = 1.0;
        for (const auto& block : sigma.blocks)
            for (std::size_t i = 2; i < block.size(); ++i)
                weight *= static_cast<double>(i);
        // assign a cell label to every block
        const unsigned blocks = sigma.block_count();
        std::vector<unsigned> label(blocks, 0);
        while (true) {
            double mass = 1.0;
            for (unsigned b = 0; b < blocks; ++b) mass *= masses[label[b]];
            if (mass != 0.0) {
                std::vector<unsigned> slot_labels(f.arity);
                for (unsigned b = 0; b < blocks; ++b)
                    for (unsigned slot : sigma.blocks[b]) slot_labels[slot] = label[b];
                acc += weight * mass * f.eval_labels(slot_labels);
            }
            unsigned b = 0;
            while (b < blocks && label[b] == num_cells) {
                label[b] = 0;
                ++b;
            }
            if (b == blocks) break;
            ++label[b];
        }
    }
    return acc;
}

double lambda_sequential(const AlphaMeasure& alpha, unsigned n, const SymmetricFn& f) {
    if (f.arity() != n + 1) throw std::invalid_argument("lambda_sequential: arity mismatch");
    if (!f.is_tensor()) throw std::invalid_argument("lambda_sequential: need a tensor form");
    if (f.slot_cells().empty()) return 0.0;  // zero tensor

    // applying the kernel to the last slot of a tensor indicator keeps the
    // tensor form: the fresh-point term scales by alpha(last cell), and
    // duplicating slot i survives only if slot i shares the last cell
    const unsigned last_cell = f.slot_cells().back();
    unsigned same_cell_count = 0;
    for (unsigned i = 0; i + 1 < f.slot_cells().size(); ++i)
        if (f.slot_cells()[i] == last_cell) ++same_cell_count;

    const double factor =
        cell_alpha_mass(alpha, f.cells()[last_cell]) + static_cast<double>(same_cell_count);

    if (n == 0) return factor;

    std::vector<unsigned> degrees = f.degrees();
    degrees[last_cell] -= 1;
    const SymmetricFn g = SymmetricFn::tensor_indicator(f.cells(), degrees);
    return factor * lambda_n_integral(alpha, n, g);
}

}  // namespace dualsim
