#pragma once

// Finite counting measures and the combinatorial calculus on them: factorial
// measures, monomial integrals, the K-transform, the lowering operator,
// set-partition identities and the lambda_n reference measures.

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "dualsim/alpha_measure.hpp"

namespace dualsim {

enum class Space { Discrete, Continuum };

// Measurable cell: half-open interval for the continuum, explicit site set
// for a finite discrete space.
struct Cell {
    Space space = Space::Continuum;
    double lo = 0.0, hi = 0.0;       // continuum
    std::vector<int> sites;          // discrete

    static Cell interval(double lo, double hi);
    static Cell of_sites(std::vector<int> sites);
    bool contains(double point) const;
};

// Finite point configuration; points are stored sorted so equality of
// counting measures is plain equality of the representation.
class CountingMeasure {
public:
    CountingMeasure() = default;

    static CountingMeasure empty(Space s);
    static CountingMeasure discrete(const std::vector<int>& sites);
    static CountingMeasure continuum(std::vector<double> coords);
    static CountingMeasure from_occupation(const std::vector<int>& occupation);

    Space space() const { return space_; }
    std::size_t total() const { return pts_.size(); }
    double point(std::size_t i) const { return pts_[i]; }
    const std::vector<double>& points() const { return pts_; }

    std::size_t count_in(const Cell& cell) const;
    std::vector<int> occupation(int num_sites) const;

    CountingMeasure without(std::size_t index) const;
    CountingMeasure with(double point) const;

    bool operator==(const CountingMeasure&) const = default;

    std::string to_json() const;
    static CountingMeasure from_json(const std::string& text, Space space);

private:
    Space space_ = Space::Continuum;
    std::vector<double> pts_;  // sorted
};

// Bounded symmetric function of n points. Either a tensor product of
// indicator powers over pairwise disjoint cells, or a generic evaluator with
// a declared bound (unbounded evaluators are refused).
class SymmetricFn {
public:
    using Evaluator = std::function<double(const double*, std::size_t)>;

    static SymmetricFn constant(unsigned arity, double value);
    static SymmetricFn tensor_indicator(std::vector<Cell> cells,
                                        std::vector<unsigned> degrees);
    static SymmetricFn generic(unsigned arity, double bound, Evaluator eval);

    unsigned arity() const { return arity_; }
    double bound() const { return bound_; }
    double eval(const double* pts) const { return eval_(pts, arity_); }
    double eval(const std::vector<double>& pts) const;

    bool is_tensor() const { return !cells_.empty() || tensor_zero_; }
    const std::vector<Cell>& cells() const { return cells_; }
    const std::vector<unsigned>& degrees() const { return degrees_; }
    // cell index of each of the arity slots (tensor form only)
    const std::vector<unsigned>& slot_cells() const { return slot_cells_; }

private:
    unsigned arity_ = 0;
    double bound_ = 0.0;
    Evaluator eval_;
    std::vector<Cell> cells_;
    std::vector<unsigned> degrees_;
    std::vector<unsigned> slot_cells_;
    bool tensor_zero_ = false;  // tensor that collapsed to the zero function
    friend SymmetricFn collapse(const SymmetricFn&, const struct SetPartition&);
};

// Partition of {0,..,n-1}; blocks are ordered by least element.
struct SetPartition {
    unsigned n = 0;
    std::vector<std::vector<unsigned>> blocks;
    unsigned block_count() const { return static_cast<unsigned>(blocks.size()); }
};

// All partitions of an n-element set, count Bell(n), in restricted-growth
// string order. Valid for 1 <= n <= 10.
std::vector<SetPartition> set_partitions(unsigned n);

// (f)_sigma: identify, in order of occurrence, arguments in the same block.
SymmetricFn collapse(const SymmetricFn& f, const SetPartition& sigma);

// integral of f against the n-th factorial measure (injective index tuples)
double factorial_integral(const CountingMeasure& eta, unsigned n, const SymmetricFn& f);

// integral of f against the n-fold product measure (all index tuples)
double product_integral(const CountingMeasure& eta, unsigned n, const SymmetricFn& f);

// K-transform: F(0) + sum_n 1/n! int F(delta_x1+..+delta_xn) d eta^(n),
// truncated at depth_limit sectors
double k_transform(const CountingMeasure& eta,
                   const std::function<double(const CountingMeasure&)>& big_f,
                   unsigned depth_limit);

// lowering operator: sum over particles of F(eta - delta_x)
double lowering(const CountingMeasure& eta,
                const std::function<double(const CountingMeasure&)>& big_f);

// product integral rebuilt from factorial integrals over set partitions;
// agrees with product_integral
double monomial_via_factorials(const CountingMeasure& eta, unsigned n,
                               const SymmetricFn& f);

// factorial integral rebuilt from product integrals. The signed coefficient
// of a partition is prod_{A} (-1)^{|A|-1} (|A|-1)!, the family certified by
// the brute-force identity (see tests).
double factorial_via_monomials(const CountingMeasure& eta, unsigned n,
                               const SymmetricFn& f);

// lambda_n: sum over set partitions of prod (|A|-1)! int (f)_sigma d alpha^|sigma|.
// Requires the tensor-indicator form (closed-form alpha integrals).
double lambda_n_integral(const AlphaMeasure& alpha, unsigned n, const SymmetricFn& f);

// Symmetric function that depends only on the cell labels of its arguments
// (label N = outside all cells). Used for integrands like squared
// symmetrized indicators where the plain tensor form is not closed.
struct CellSymbolicFn {
    unsigned arity = 0;
    std::vector<Cell> cells;  // pairwise disjoint
    std::function<double(const std::vector<unsigned>&)> eval_labels;
};
double lambda_n_integral(const AlphaMeasure& alpha, const CellSymbolicFn& f);

// lambda_{n+1}(f) built sequentially from lambda_n through the kernel that
// either places a fresh alpha-distributed point or duplicates an existing
// coordinate; f has arity n+1 and must be in tensor form.
double lambda_sequential(const AlphaMeasure& alpha, unsigned n, const SymmetricFn& f);

}  // namespace dualsim
