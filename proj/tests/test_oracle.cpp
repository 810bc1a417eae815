#include <doctest.h>

#include <cmath>

#include "dualsim/oracle.hpp"

using namespace dualsim;

TEST_CASE("monomial enumeration is graded and complete") {
    const auto basis = monomials_up_to(2, 2);
    CHECK(basis.size() == 6);  // 1, two of degree 1, three of degree 2
    CHECK(basis.front() == MultiIndex{0, 0});
    unsigned last_total = 0;
    for (const auto& e : basis) {
        const unsigned total = e[0] + e[1];
        CHECK(total >= last_total);
        last_total = total;
    }
}

TEST_CASE("moment table reproduces known moments") {
    const MomentTable table({poisson_pmf(1.5), neg_binomial_pmf(2.0, 0.4)}, 4);
    CHECK(table.moment(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(table.moment(0, 1) == doctest::Approx(1.5).epsilon(1e-12));
    // Poisson second raw moment: mean + mean^2
    CHECK(table.moment(0, 2) == doctest::Approx(1.5 + 2.25).epsilon(1e-12));
    const Pmf nb = neg_binomial_pmf(2.0, 0.4);
    CHECK(table.moment(1, 1) == doctest::Approx(nb.mean()).epsilon(1e-12));
    CHECK(table.moment(1, 2) ==
          doctest::Approx(nb.variance() + nb.mean() * nb.mean()).epsilon(1e-12));
    // product measure factorizes
    CHECK(table.expect_monomial({2, 1}) ==
          doctest::Approx(table.moment(0, 2) * table.moment(1, 1)).epsilon(1e-12));
}

TEST_CASE("projection reproduces the univariate monic families") {
    // single site, Poisson: the projected monomial is the Charlier polynomial
    for (unsigned n : {1u, 2u, 3u, 4u}) {
        const auto gs = gram_schmidt_In({poisson_pmf(1.3)}, {n});
        for (double x : {0.0, 1.0, 2.0, 5.0, 9.0}) {
            CHECK(gs.poly.eval({x}) ==
                  doctest::Approx(charlier(n, x, 1.3)).epsilon(1e-9));
        }
    }
    // single site, negative binomial: Meixner
    for (unsigned n : {1u, 2u, 3u, 4u}) {
        const auto gs = gram_schmidt_In({neg_binomial_pmf(0.9, 0.45)}, {n});
        for (double x : {0.0, 1.0, 3.0, 7.0}) {
            CHECK(gs.poly.eval({x}) ==
                  doctest::Approx(meixner(n, x, 0.9, 0.45)).epsilon(1e-8));
        }
    }
    // single site, binomial: Krawtchouk
    for (unsigned n : {1u, 2u, 3u}) {
        const auto gs = gram_schmidt_In({binomial_pmf(6, 0.3)}, {n});
        for (double x : {0.0, 2.0, 4.0, 6.0}) {
            CHECK(gs.poly.eval({x}) ==
                  doctest::Approx(krawtchouk(n, x, 6, 0.3)).epsilon(1e-9));
        }
    }
}

TEST_CASE("degree zero projects to the constant") {
    const auto gs = gram_schmidt_In({poisson_pmf(1.0), poisson_pmf(2.0)}, {0, 0});
    CHECK(gs.poly.eval({3.0, 4.0}) == 1.0);
    CHECK(gs.condition == 1.0);
}

TEST_CASE("projection is orthogonal to every lower-degree monomial") {
    const std::vector<Pmf> marginals{neg_binomial_pmf(1.0, 0.5),
                                     neg_binomial_pmf(0.7, 0.5)};
    const MultiIndex degrees{2, 1};
    const auto gs = gram_schmidt_In(marginals, degrees);
    const MomentTable table(marginals, 6);
    for (const auto& e : monomials_up_to(2, 2)) {
        MultiPoly mono;
        mono.add(e, 1.0);
        CHECK(std::fabs(table.expect_product(gs.poly, mono)) <= 1e-9);
    }
    CHECK(gs.condition > 1.0);
    CHECK(gs.condition < 1e8);
}

TEST_CASE("ill-conditioned moment matrices are rejected") {
    // a two-point support cannot carry independent monomials up to degree 2
    CHECK_THROWS_AS(gram_schmidt_In({binomial_pmf(1, 0.5)}, {3}), std::runtime_error);
}
