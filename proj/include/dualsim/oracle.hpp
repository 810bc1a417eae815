#pragma once

// Independent projection oracle: orthogonalizes occupation monomials against
// a product of discrete marginal laws using raw moment matrices. Nothing here
// touches the closed-form polynomial families, so the oracle can certify them.

#include <cstddef>
#include <utility>
#include <vector>

#include "dualsim/orthopoly.hpp"

namespace dualsim {

using MultiIndex = std::vector<unsigned>;

// Polynomial in the count variables (one per marginal), sparse term list.
struct MultiPoly {
    std::vector<std::pair<MultiIndex, double>> terms;

    double eval(const std::vector<double>& counts) const;
    MultiPoly& add(const MultiIndex& e, double coeff);
};

// Raw moments of a product measure with independent marginals, truncated at
// tail weight below 1e-14 times the target accuracy of the highest moment.
class MomentTable {
public:
    MomentTable(std::vector<Pmf> marginals, unsigned max_degree);

    std::size_t sites() const { return moments_.size(); }
    unsigned max_degree() const { return max_degree_; }
    // j-th raw moment of marginal `site`
    double moment(std::size_t site, unsigned j) const;
    // E[prod_x count_x^{e_x}]
    double expect_monomial(const MultiIndex& e) const;
    // E[p * q] under the product measure
    double expect_product(const MultiPoly& p, const MultiPoly& q) const;

private:
    std::vector<std::vector<long double>> moments_;
    unsigned max_degree_ = 0;
};

// all multi-indices over `sites` variables with total degree <= max_total,
// graded lexicographic order
std::vector<MultiIndex> monomials_up_to(std::size_t sites, unsigned max_total);

struct GramSchmidtResult {
    MultiPoly poly;     // monomial minus its projection onto lower degrees
    double condition;   // infinity-norm condition estimate of the Gram matrix
};

// Orthogonal projection of the monomial prod count^degrees onto the
// complement of polynomials of total degree < sum(degrees), with respect to
// the product of the given marginals. Throws if the moment matrix condition
// exceeds cond_limit.
GramSchmidtResult gram_schmidt_In(const std::vector<Pmf>& marginals,
                                  const MultiIndex& degrees,
                                  double cond_limit = 1e12);

}  // namespace dualsim
