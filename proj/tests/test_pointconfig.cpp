#include <doctest.h>

#include <cmath>
#include <vector>

#include "dualsim/orthopoly.hpp"
#include "dualsim/pointconfig.hpp"
#include "dualsim/rng.hpp"

using namespace dualsim;

TEST_CASE("counting measures are canonical and serializable") {
    const auto a = CountingMeasure::discrete({2, 0, 2});
    const auto b = CountingMeasure::discrete({2, 2, 0});
    CHECK(a == b);
    CHECK(a.total() == 3);
    CHECK(a.to_json() == "[0,2,2]");
    CHECK(CountingMeasure::from_json("[0,2,2]", Space::Discrete) == a);

    const auto c = CountingMeasure::continuum({0.75, 0.25});
    CHECK(c.point(0) == 0.25);
    CHECK(CountingMeasure::from_json(c.to_json(), Space::Continuum) == c);
    CHECK_THROWS(CountingMeasure::continuum({1.5}));

    const auto occ = a.occupation(3);
    CHECK(occ == std::vector<int>{1, 0, 2});
    CHECK(CountingMeasure::from_occupation(occ) == a);
}

TEST_CASE("factorial and product integrals on small configurations") {
    // eta = delta_a + delta_a + delta_b
    const auto eta = CountingMeasure::discrete({0, 0, 1});
    const auto one2 = SymmetricFn::constant(2, 1.0);
    CHECK(factorial_integral(eta, 2, one2) == 6.0);  // ordered injective pairs
    const auto pair = CountingMeasure::discrete({0, 1});
    CHECK(product_integral(pair, 2, one2) == 4.0);

    // single-cell tensor indicator: falling vs plain powers of the count
    const auto cell = Cell::of_sites({0});
    const auto f2 = SymmetricFn::tensor_indicator({cell}, {2});
    const auto three = CountingMeasure::discrete({0, 0, 0});
    CHECK(factorial_integral(three, 2, f2) == 6.0);   // (3)_2
    CHECK(product_integral(three, 2, f2) == 9.0);     // 3^2

    // empty sums
    CHECK(factorial_integral(eta, 4, SymmetricFn::constant(4, 1.0)) == 0.0);
    const auto f0 = SymmetricFn::constant(0, 2.5);
    CHECK(factorial_integral(eta, 0, f0) == 2.5);
    CHECK(product_integral(eta, 0, f0) == 2.5);
    CHECK_THROWS(factorial_integral(eta, 1, one2));  // arity mismatch
}

TEST_CASE("tensor factorial integral equals the falling-factorial product") {
    CounterRng rng(11, 0);
    const auto b1 = Cell::interval(0.0, 0.3);
    const auto b2 = Cell::interval(0.5, 0.8);
    for (int rep = 0; rep < 40; ++rep) {
        std::vector<double> pts;
        const int n_pts = static_cast<int>(rng.uniform() * 6);
        for (int i = 0; i < n_pts; ++i) pts.push_back(rng.uniform());
        const auto eta = CountingMeasure::continuum(pts);
        for (unsigned d1 = 0; d1 <= 2; ++d1) {
            for (unsigned d2 = 0; d2 <= 2; ++d2) {
                if (d1 + d2 == 0) continue;
                const auto f = SymmetricFn::tensor_indicator({b1, b2}, {d1, d2});
                const double expect =
                    falling_factorial(static_cast<double>(eta.count_in(b1)), d1) *
                    falling_factorial(static_cast<double>(eta.count_in(b2)), d2);
                CHECK(factorial_integral(eta, d1 + d2, f) == doctest::Approx(expect));
            }
        }
    }
}

TEST_CASE("k-transform") {
    const auto empty = CountingMeasure::empty(Space::Discrete);
    auto big_f_one = [](const CountingMeasure&) { return 1.0; };
    CHECK(k_transform(empty, big_f_one, 10) == 1.0);

    // F = 1 on all sectors gives 2^N
    for (int n_pts : {1, 3, 6}) {
        std::vector<int> sites(static_cast<std::size_t>(n_pts));
        for (int i = 0; i < n_pts; ++i) sites[static_cast<std::size_t>(i)] = i % 2;
        const auto eta = CountingMeasure::discrete(sites);
        CHECK(k_transform(eta, big_f_one, 10) ==
              doctest::Approx(std::pow(2.0, n_pts)));
    }

    // F = indicator of a single point in B counts points of B
    const auto eta = CountingMeasure::discrete({0, 0, 1, 2});
    auto single_in_b = [](const CountingMeasure& cfg) {
        return cfg.total() == 1 && cfg.point(0) == 0.0 ? 1.0 : 0.0;
    };
    CHECK(k_transform(eta, single_in_b, 10) == 2.0);

    // linearity on sampled evaluators
    auto g1 = [](const CountingMeasure& cfg) { return static_cast<double>(cfg.total()); };
    auto g2 = [](const CountingMeasure& cfg) {
        return cfg.total() == 2 ? 3.0 : -1.0;
    };
    const double lhs = k_transform(
        eta, [&](const CountingMeasure& cfg) { return 2.0 * g1(cfg) - 0.5 * g2(cfg); }, 10);
    CHECK(lhs == doctest::Approx(2.0 * k_transform(eta, g1, 10) -
                                 0.5 * k_transform(eta, g2, 10)));
}

TEST_CASE("lowering operator") {
    auto big_f_one = [](const CountingMeasure&) { return 1.0; };
    CHECK(lowering(CountingMeasure::empty(Space::Discrete), big_f_one) == 0.0);
    CHECK(lowering(CountingMeasure::discrete({4}), big_f_one) == 1.0);
    // eta = 2 delta_a, F = indicator of one point at a
    const auto eta = CountingMeasure::discrete({1, 1});
    auto f = [](const CountingMeasure& cfg) {
        return cfg.total() == 1 && cfg.point(0) == 1.0 ? 1.0 : 0.0;
    };
    CHECK(lowering(eta, f) == 2.0);
}

TEST_CASE("set partitions have Bell counts and canonical blocks") {
    CHECK(set_partitions(1).size() == 1);
    CHECK(set_partitions(3).size() == 5);
    CHECK(set_partitions(5).size() == 52);
    CHECK(set_partitions(7).size() == 877);
    CHECK_THROWS(set_partitions(0));
    CHECK_THROWS(set_partitions(11));
    for (const auto& sigma : set_partitions(4)) {
        // blocks ordered by least element, indices covered exactly once
        std::vector<bool> seen(4, false);
        unsigned last_min = 0;
        for (std::size_t b = 0; b < sigma.blocks.size(); ++b) {
            CHECK(!sigma.blocks[b].empty());
            if (b > 0) CHECK(sigma.blocks[b].front() > last_min);
            last_min = sigma.blocks[b].front();
            for (unsigned i : sigma.blocks[b]) {
                CHECK(!seen[i]);
                seen[i] = true;
            }
        }
        for (bool s : seen) CHECK(s);
    }
}

TEST_CASE("collapse identifies arguments") {
    // n=3, sigma = {{0,2},{1}}, f(x,y,z) = g(x) h(y) g(z)
    auto f = SymmetricFn::generic(3, 100.0, [](const double* p, std::size_t) {
        auto g = [](double v) { return 1.0 + v; };
        auto h = [](double v) { return 2.0 - v; };
        return g(p[0]) * h(p[1]) * g(p[2]);
    });
    SetPartition sigma;
    sigma.n = 3;
    sigma.blocks = {{0, 2}, {1}};
    const auto fc = collapse(f, sigma);
    CHECK(fc.arity() == 2);
    CHECK(fc.bound() == 100.0);
    const double u = 0.3, v = 0.9;
    CHECK(fc.eval(std::vector<double>{u, v}) ==
          doctest::Approx((1.0 + u) * (1.0 + u) * (2.0 - v)));

    // all singletons leave the function unchanged
    SetPartition singletons;
    singletons.n = 3;
    singletons.blocks = {{0}, {1}, {2}};
    const auto fs = collapse(f, singletons);
    CHECK(fs.eval(std::vector<double>{0.1, 0.5, 0.7}) ==
          doctest::Approx(f.eval(std::vector<double>{0.1, 0.5, 0.7})));

    // tensor collapse across different cells vanishes
    const auto t = SymmetricFn::tensor_indicator(
        {Cell::interval(0.0, 0.5), Cell::interval(0.5, 1.0)}, {1, 1});
    SetPartition both;
    both.n = 2;
    both.blocks = {{0, 1}};
    const auto tc = collapse(t, both);
    CHECK(tc.eval(std::vector<double>{0.25}) == 0.0);
    CHECK(tc.eval(std::vector<double>{0.75}) == 0.0);
}

namespace {

SymmetricFn random_tensor(CounterRng& rng, unsigned max_arity, unsigned& arity_out) {
    const auto cells = std::vector<Cell>{Cell::interval(0.0, 0.25),
                                         Cell::interval(0.25, 0.6),
                                         Cell::interval(0.6, 1.0)};
    std::vector<unsigned> degrees(3, 0);
    unsigned arity = 0;
    while (arity == 0 || arity > max_arity) {
        arity = 0;
        for (auto& d : degrees) {
            d = static_cast<unsigned>(rng.uniform() * 2.4);
            arity += d;
        }
    }
    arity_out = arity;
    return SymmetricFn::tensor_indicator(cells, degrees);
}

}  // namespace

TEST_CASE("partition identities against brute force, 200 randomized instances") {
    CounterRng rng(2024, 5);
    for (int checked = 0; checked < 200; ++checked) {
        std::vector<double> pts;
        const int n_pts = static_cast<int>(rng.uniform() * 6);  // up to 5 points
        for (int i = 0; i < n_pts; ++i) {
            // piles exercise the multiplicity handling
            if (!pts.empty() && rng.uniform() < 0.3)
                pts.push_back(pts.front());
            else
                pts.push_back(rng.uniform());
        }
        const auto eta = CountingMeasure::continuum(pts);
        unsigned arity = 0;
        const auto f = random_tensor(rng, 4, arity);

        const double direct_prod = product_integral(eta, arity, f);
        const double via_fact = monomial_via_factorials(eta, arity, f);
        CHECK(std::fabs(direct_prod - via_fact) <= 1e-12 * (1.0 + std::fabs(direct_prod)));

        const double direct_fact = factorial_integral(eta, arity, f);
        const double via_mono = factorial_via_monomials(eta, arity, f);
        CHECK(std::fabs(direct_fact - via_mono) <= 1e-12 * (1.0 + std::fabs(direct_fact)));
    }
}

TEST_CASE("signed inversion needs the per-block factorials") {
    // with f = 1 and 4 points, degree 3: brute force gives (4)_3 = 24;
    // the per-block factorials are what make the partition sum match
    const auto eta = CountingMeasure::discrete({0, 1, 2, 3});
    const auto f3 = SymmetricFn::constant(3, 1.0);
    CHECK(factorial_integral(eta, 3, f3) == 24.0);
    CHECK(factorial_via_monomials(eta, 3, f3) == doctest::Approx(24.0));
    // the bare signs (-1)^{n-|sigma|} alone would give N^3 - 3N^2 + N = 20
    double bare = 0.0;
    for (const auto& sigma : set_partitions(3)) {
        const double sign = (3 - sigma.block_count()) % 2 == 0 ? 1.0 : -1.0;
        bare += sign * product_integral(eta, sigma.block_count(), collapse(f3, sigma));
    }
    CHECK(bare == doctest::Approx(20.0));
}

TEST_CASE("diagonal example: monomial = pairs plus diagonal") {
    const auto eta = CountingMeasure::discrete({0, 0});
    const auto one2 = SymmetricFn::constant(2, 1.0);
    CHECK(product_integral(eta, 2, one2) == 4.0);
    CHECK(monomial_via_factorials(eta, 2, one2) == doctest::Approx(4.0));  // 2 + 2
    CHECK(factorial_via_monomials(eta, 2, one2) == doctest::Approx(2.0));  // 4 - 2
}

TEST_CASE("lambda_n on tensor indicators") {
    const AlphaMeasure alpha({1.2, 0.4}, {{0.25, 0.5}});  // density plus one atom
    const auto cell_a = Cell::interval(0.0, 0.5);
    const auto cell_b = Cell::interval(0.5, 1.0);
    const double mass_a = alpha.interval_mass(0.0, 0.5);
    const double mass_b = alpha.interval_mass(0.5, 1.0);

    // lambda_1 = alpha
    CHECK(lambda_n_integral(alpha, 1, SymmetricFn::tensor_indicator({cell_a}, {1})) ==
          doctest::Approx(mass_a));

    // lambda_2(A x A) = alpha(A)^2 + alpha(A)
    CHECK(lambda_n_integral(alpha, 2, SymmetricFn::tensor_indicator({cell_a}, {2})) ==
          doctest::Approx(mass_a * mass_a + mass_a));

    // disjoint cells: product of rising factorials
    for (unsigned d1 : {1u, 2u, 3u}) {
        for (unsigned d2 : {0u, 1u, 2u}) {
            const auto f = SymmetricFn::tensor_indicator({cell_a, cell_b}, {d1, d2});
            const double expect =
                rising_factorial(mass_a, d1) * rising_factorial(mass_b, d2);
            CHECK(lambda_n_integral(alpha, d1 + d2, f) == doctest::Approx(expect));
        }
    }

    // symmetry under permuting the (cell, degree) pairs
    CHECK(lambda_n_integral(alpha, 3,
                            SymmetricFn::tensor_indicator({cell_a, cell_b}, {2, 1})) ==
          doctest::Approx(lambda_n_integral(
              alpha, 3, SymmetricFn::tensor_indicator({cell_b, cell_a}, {1, 2}))));
}

TEST_CASE("sequential lambda construction matches the partition sum") {
    const AlphaMeasure alpha({0.8, 1.6}, {});
    const auto cell_a = Cell::interval(0.0, 0.5);
    const auto cell_b = Cell::interval(0.5, 1.0);

    // n = 0 -> 1 reproduces alpha
    CHECK(lambda_sequential(alpha, 0, SymmetricFn::tensor_indicator({cell_a}, {1})) ==
          doctest::Approx(alpha.interval_mass(0.0, 0.5)));

    // n = 1 -> 2 reproduces c^2 + c on A x A
    const double c = alpha.interval_mass(0.0, 0.5);
    CHECK(lambda_sequential(alpha, 1, SymmetricFn::tensor_indicator({cell_a}, {2})) ==
          doctest::Approx(c * c + c));

    // n = 2 -> 3 on mixed cells
    for (auto degrees : {std::vector<unsigned>{2, 1}, std::vector<unsigned>{1, 2},
                         std::vector<unsigned>{3, 0}}) {
        const auto f = SymmetricFn::tensor_indicator({cell_a, cell_b}, degrees);
        CHECK(lambda_sequential(alpha, 2, f) ==
              doctest::Approx(lambda_n_integral(alpha, 3, f)).epsilon(1e-12));
    }
}

TEST_CASE("cell-symbolic lambda agrees with the tensor route") {
    const AlphaMeasure alpha({1.0}, {});
    const auto cell_a = Cell::interval(0.1, 0.4);
    const auto cell_b = Cell::interval(0.6, 0.9);
    const auto f = SymmetricFn::tensor_indicator({cell_a, cell_b}, {2, 1});

    CellSymbolicFn g;
    g.arity = 3;
    g.cells = {cell_a, cell_b};
    g.eval_labels = [](const std::vector<unsigned>& labels) {
        // indicator of (A, A, B) in the given slot order
        return labels[0] == 0 && labels[1] == 0 && labels[2] == 1 ? 1.0 : 0.0;
    };
    CHECK(lambda_n_integral(alpha, g) ==
          doctest::Approx(lambda_n_integral(alpha, 3, f)).epsilon(1e-12));
}

TEST_CASE("factorial measure total mass is the falling factorial") {
    CounterRng rng(3, 9);
    for (int rep = 0; rep < 20; ++rep) {
        const int n_pts = static_cast<int>(rng.uniform() * 7);
        std::vector<double> pts;
        for (int i = 0; i < n_pts; ++i) pts.push_back(rng.uniform());
        const auto eta = CountingMeasure::continuum(pts);
        for (unsigned n = 1; n <= 4; ++n)
            CHECK(factorial_integral(eta, n, SymmetricFn::constant(n, 1.0)) ==
                  falling_factorial(static_cast<double>(n_pts), n));
    }
}
