#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "dualsim/discrete.hpp"
#include "dualsim/rng.hpp"

using namespace dualsim;

namespace {

SiteSystem two_site(int sigma, std::vector<double> alpha, double c12 = 1.0) {
    SiteSystem sys;
    sys.m = 2;
    sys.sigma = sigma;
    sys.c = {{0.0, c12}, {c12, 0.0}};
    sys.alpha = std::move(alpha);
    return sys;
}

SiteSystem random_system(int sigma, int m, CounterRng& rng) {
    SiteSystem sys;
    sys.m = m;
    sys.sigma = sigma;
    sys.c.assign(m, std::vector<double>(m, 0.0));
    for (int x = 0; x < m; ++x)
        for (int y = x + 1; y < m; ++y)
            sys.c[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)] =
                sys.c[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)] =
                    0.2 + rng.uniform();
    for (int x = 0; x < m; ++x)
        sys.alpha.push_back(sigma == -1 ? 1.0 + std::floor(rng.uniform() * 3.0)
                                        : 0.5 + 2.0 * rng.uniform());
    return sys;
}

double row_sum_max(const vec::CsrMatrix& q) {
    double worst = 0.0;
    for (std::size_t r = 0; r < q.rows; ++r) {
        double acc = 0.0;
        for (std::int64_t k = q.row_ptr[r]; k < q.row_ptr[r + 1]; ++k)
            acc += q.val[static_cast<std::size_t>(k)];
        worst = std::max(worst, std::fabs(acc));
    }
    return worst;
}

}  // namespace

TEST_CASE("site system validation") {
    auto sys = two_site(0, {1.0, 1.0});
    CHECK_NOTHROW(sys.validate());
    sys.c[0][1] = 2.0;  // break symmetry
    CHECK_THROWS(sys.validate());
    sys = two_site(-1, {1.5, 1.0});
    CHECK_THROWS(sys.validate());  // exclusion needs integer weights
    SiteSystem disconnected;
    disconnected.m = 3;
    disconnected.sigma = 0;
    disconnected.c = {{0, 1, 0}, {1, 0, 0}, {0, 0, 0}};
    disconnected.alpha = {1, 1, 1};
    CHECK_THROWS(disconnected.validate());
}

TEST_CASE("sector enumeration") {
    const auto sys = two_site(0, {1.0, 1.0});
    const SectorEnumeration sector(sys, 3);
    CHECK(sector.size() == 4);  // C(3+1, 1)
    CHECK(sector.config(0) == std::vector<int>{0, 3});
    CHECK(sector.config(3) == std::vector<int>{3, 0});
    CHECK(sector.index_of({1, 2}) == 1);
    CHECK_THROWS(sector.index_of({4, 0}));

    SiteSystem three;
    three.m = 3;
    three.sigma = 0;
    three.c = {{0, 1, 1}, {1, 0, 1}, {1, 1, 0}};
    three.alpha = {1, 1, 1};
    CHECK(SectorEnumeration(three, 4).size() == 15);  // C(6, 2)

    // exclusion caps the occupancies
    const auto sep = two_site(-1, {2.0, 1.0});
    const SectorEnumeration capped(sep, 2);
    CHECK(capped.size() == 2);  // (1,1) and (2,0)
}

TEST_CASE("generator rates match the rate formula") {
    const auto irw = two_site(0, {1.0, 2.0}, 0.7);
    const auto g1 = build_generator(irw, 1);
    CHECK(g1.q.rows == 2);
    CHECK(row_sum_max(g1.q) == doctest::Approx(0.0).epsilon(1e-15));

    // inclusion: rate (2,0) -> (1,1) is c * eta_0 * (alpha_1 + eta_1) = 2 c
    const auto sip = two_site(1, {1.0, 1.0}, 1.0);
    const auto g2 = build_generator(sip, 2);
    const auto& sector = *g2.sector;
    const auto from = sector.index_of({2, 0});
    const auto to = sector.index_of({1, 1});
    double rate = 0.0;
    for (std::int64_t k = g2.q.row_ptr[from]; k < g2.q.row_ptr[from + 1]; ++k)
        if (static_cast<std::size_t>(g2.q.col[static_cast<std::size_t>(k)]) == to)
            rate = g2.q.val[static_cast<std::size_t>(k)];
    CHECK(rate == doctest::Approx(2.0));

    // exclusion with full occupancy freezes
    const auto sep = two_site(-1, {1.0, 1.0});
    const auto g3 = build_generator(sep, 2);
    CHECK(g3.q.rows == 1);
    CHECK(g3.max_exit_rate == 0.0);

    CHECK_THROWS(build_generator(two_site(-1, {1.0, 1.0}), 3));  // empty sector
}

TEST_CASE("uniformized semigroup matches the two-state closed form") {
    const auto sys = two_site(0, {1.0, 1.0});
    const auto gen = build_generator(sys, 1);
    const std::vector<double> e1{1.0, 0.0};
    CHECK(semigroup_apply(gen, 0.0, e1) == e1);
    for (double t : {0.1, 0.7, 2.0, 25.0}) {
        const auto pt = semigroup_apply(gen, t, e1);
        CHECK(pt[0] == doctest::Approx(0.5 * (1.0 + std::exp(-2.0 * t))).epsilon(1e-12));
        CHECK(pt[0] + pt[1] == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("reversible sector distribution is invariant") {
    CounterRng rng(99, 0);
    for (int sigma : {-1, 0, 1}) {
        auto sys = random_system(sigma, 3, rng);
        const double theta = sigma == -1 ? 0.6 : 0.8;
        const auto gen = build_generator(sys, 2);
        const auto pi = sector_distribution(sys, theta, *gen.sector);
        const auto evolved = semigroup_apply(gen, 0.9, pi, /*transpose=*/true);
        for (std::size_t i = 0; i < pi.size(); ++i)
            CHECK(evolved[i] == doctest::Approx(pi[i]).epsilon(1e-10));
        CHECK(detailed_balance_residual(sys, theta, 2) <= 1e-14);
    }
}

TEST_CASE("lowering matrix") {
    const auto sys = two_site(0, {1.0, 1.0});
    const auto low = lowering_matrix(sys, 2);  // sector-1 functions to sector-2
    std::vector<double> ones(low.cols, 1.0), out(low.rows);
    vec::spmv(low, ones.data(), out.data());
    for (double v : out) CHECK(v == doctest::Approx(2.0));
    const SectorEnumeration upper(sys, 2);
    const SectorEnumeration lower_sector(sys, 1);
    std::vector<double> indicator(lower_sector.size(), 0.0);
    indicator[lower_sector.index_of({1, 0})] = 1.0;
    vec::spmv(low, indicator.data(), out.data());
    CHECK(out[upper.index_of({2, 0})] == doctest::Approx(2.0));
}

TEST_CASE("consistency commutator vanishes for all interaction signs") {
    CounterRng rng(31, 0);
    for (int sigma : {-1, 0, 1}) {
        for (int m : {2, 3, 4}) {
            for (unsigned n : {1u, 2u, 3u}) {
                auto sys = random_system(sigma, m, rng);
                if (sigma == -1) {
                    const double cap = std::accumulate(sys.alpha.begin(),
                                                       sys.alpha.end(), 0.0);
                    if (cap < n) continue;
                }
                CHECK(consistency_commutator(sys, n) <= 1e-12);
            }
        }
    }
}

TEST_CASE("exact rational commutator and detailed balance are zero") {
    for (int sigma : {-1, 0, 1}) {
        SiteSystem sys;
        sys.m = 3;
        sys.sigma = sigma;
        sys.c = {{0, 1, 2}, {1, 0, 1}, {2, 1, 0}};
        sys.alpha = {2, 1, 1};
        std::vector<std::vector<Rational>> c_exact(3, std::vector<Rational>(3));
        for (int x = 0; x < 3; ++x)
            for (int y = 0; y < 3; ++y)
                c_exact[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)] =
                    Rational(static_cast<std::int64_t>(
                        sys.c[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)]));
        for (unsigned n : {1u, 2u, 3u}) {
            CHECK(consistency_commutator_exact(sys, c_exact, n) == Rational(0));
            CHECK(detailed_balance_residual_exact(sys, c_exact, n) == Rational(0));
        }
    }
}

TEST_CASE("duality function special cases") {
    const auto sys = two_site(1, {1.0, 2.0});
    const double theta = 0.5;
    const auto rho = reversible_measure(sys, theta);
    const auto cheap = duality_function(sys, theta, DualityKind::Cheap);
    const auto classical = duality_function(sys, theta, DualityKind::Classical);

    const std::vector<int> zero{0, 0}, eta{2, 1};
    CHECK(classical(zero, eta) == doctest::Approx(1.0 / rho.mass(zero)));
    CHECK(cheap(zero, eta) == 0.0);
    CHECK(cheap(eta, eta) == doctest::Approx(1.0 / rho.mass(eta)));

    // one dual particle at x: classical duality proportional to eta_x
    const std::vector<int> dx{1, 0};
    const double site1_factor = 1.0 / rho.marginals[1](0);
    for (int k : {0, 1, 2, 3}) {
        const std::vector<int> cfg{k, 1};
        CHECK(classical(dx, cfg) ==
              doctest::Approx(k / rho.marginals[0](1) * site1_factor).epsilon(1e-12));
    }
}

namespace {

// 2F0(-n, -x; ; z) as a terminating series
double hyp2f0(int n, int x, double z) {
    double acc = 0.0, term = 1.0;
    for (int k = 0;; ++k) {
        acc += term;
        if (k >= n || k >= x) break;
        term *= static_cast<double>(-n + k) * static_cast<double>(-x + k) * z /
                static_cast<double>(k + 1);
    }
    return acc;
}

}  // namespace

TEST_CASE("orthogonal duality for independent walkers matches hypergeometric form") {
    SiteSystem sys;
    sys.m = 3;
    sys.sigma = 0;
    sys.c = {{0, 1, 1}, {1, 0, 1}, {1, 1, 0}};
    sys.alpha = {1.0, 2.0, 0.5};
    const auto ort = duality_function(sys, 1.0, DualityKind::Orthogonal);
    const double alpha_total = 3.5;
    for (const std::vector<int>& xi : {std::vector<int>{1, 0, 0},
                                       std::vector<int>{1, 2, 0},
                                       std::vector<int>{0, 1, 1}}) {
        for (const std::vector<int>& eta : {std::vector<int>{2, 1, 0},
                                            std::vector<int>{1, 1, 3}}) {
            double expect = std::exp(alpha_total);
            int xi_total = 0;
            for (std::size_t x = 0; x < 3; ++x) {
                xi_total += xi[x];
                expect *= hyp2f0(xi[x], eta[x], -1.0 / sys.alpha[x]);
            }
            expect *= (xi_total % 2 == 0) ? 1.0 : -1.0;
            CHECK(ort(xi, eta) == doctest::Approx(expect).epsilon(1e-10));
        }
    }
}

TEST_CASE("self-duality via exact semigroups") {
    CounterRng rng(7, 3);
    for (int sigma : {-1, 0, 1}) {
        auto sys = random_system(sigma, 2, rng);
        if (sigma == -1) sys.alpha = {3.0, 2.0};
        const double theta = sigma == -1 ? 0.45 : 0.7;
        const std::vector<int> xi{1, 0};
        const std::vector<int> eta{1, 1};
        for (const auto kind :
             {DualityKind::Cheap, DualityKind::Classical, DualityKind::Orthogonal}) {
            const auto zero_t = check_duality(sys, theta, kind, 0.0, xi, eta);
            CHECK(zero_t.abs_diff == 0.0);
            const auto r = check_duality(sys, theta, kind, 0.7, xi, eta);
            CHECK(r.abs_diff <= 1e-10);
        }
    }
}

TEST_CASE("single dual particle transport for independent walkers") {
    // E_eta[eta_t(x)] = sum_y p_t(x,y) eta(y) with unit weights
    SiteSystem sys;
    sys.m = 3;
    sys.sigma = 0;
    sys.c = {{0, 0.8, 0.3}, {0.8, 0, 1.1}, {0.3, 1.1, 0}};
    sys.alpha = {1.0, 1.0, 1.0};
    const std::vector<int> eta{2, 0, 1};
    const double t = 0.6;
    const auto gen3 = build_generator(sys, 3);
    const auto walker = build_labelled_generator(sys, 1);
    for (int x = 0; x < 3; ++x) {
        std::vector<double> occupancy(gen3.sector->size());
        for (std::size_t i = 0; i < occupancy.size(); ++i)
            occupancy[i] = gen3.sector->config(i)[static_cast<std::size_t>(x)];
        const double lhs =
            semigroup_apply(gen3, t, occupancy)[gen3.sector->index_of(eta)];
        std::vector<double> delta(3, 0.0);
        delta[static_cast<std::size_t>(x)] = 1.0;
        const auto pt_row = semigroup_apply(walker, t, delta, /*transpose=*/true);
        double rhs = 0.0;
        for (int y = 0; y < 3; ++y)
            rhs += pt_row[static_cast<std::size_t>(y)] * eta[static_cast<std::size_t>(y)];
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    }
}

TEST_CASE("labelled and unlabelled semigroups agree on invariant functions") {
    CounterRng rng(17, 1);
    for (int sigma : {-1, 0, 1}) {
        auto sys = random_system(sigma, 2, rng);
        if (sigma == -1) sys.alpha = {2.0, 2.0};
        const unsigned n = 2;
        const auto lab = build_labelled_generator(sys, n);
        const auto unlab = build_generator(sys, n);
        std::vector<double> f_tuple(lab.q.rows);
        for (std::size_t s = 0; s < f_tuple.size(); ++s) {
            const auto tuple = index_tuple(s, sys.m, n);
            f_tuple[s] = 1.7 * tuple[0] * tuple[1] + 0.3 * (tuple[0] + tuple[1]);
        }
        auto representative = [&](const std::vector<int>& cfg) {
            std::vector<int> tuple;
            for (int x = 0; x < sys.m; ++x)
                for (int k = 0; k < cfg[static_cast<std::size_t>(x)]; ++k)
                    tuple.push_back(x);
            return tuple_index(tuple, sys.m);
        };
        std::vector<double> f_cfg(unlab.sector->size());
        for (std::size_t i = 0; i < f_cfg.size(); ++i)
            f_cfg[i] = f_tuple[representative(unlab.sector->config(i))];
        const double t = 0.8;
        const auto lab_t = semigroup_apply(lab, t, f_tuple);
        const auto unlab_t = semigroup_apply(unlab, t, f_cfg);
        for (std::size_t i = 0; i < f_cfg.size(); ++i)
            CHECK(lab_t[representative(unlab.sector->config(i))] ==
                  doctest::Approx(unlab_t[i]).epsilon(1e-10));
    }
}

TEST_CASE("classical and orthogonal intertwining on small systems") {
    const auto f = SymmetricFn::tensor_indicator(
        {Cell::of_sites({0}), Cell::of_sites({1})}, {1, 1});

    const auto sip = two_site(1, {1.0, 2.0}, 0.9);
    const auto classical = check_intertwining(sip, 2, 3, 0.5, f, IntertwinerKind::Classical);
    CHECK(classical.max_abs_deviation <= 1e-9);
    const auto zero_t = check_intertwining(sip, 2, 3, 0.0, f, IntertwinerKind::Classical);
    CHECK(zero_t.max_abs_deviation <= 1e-13);
    const auto orthogonal =
        check_intertwining(sip, 2, 3, 0.5, f, IntertwinerKind::Orthogonal, 0.8);
    CHECK(orthogonal.max_abs_deviation <= 1e-9);

    const auto irw = two_site(0, {1.0, 1.5}, 1.2);
    const auto ort0 =
        check_intertwining(irw, 2, 3, 0.0, f, IntertwinerKind::Orthogonal, 1.0);
    CHECK(ort0.max_abs_deviation <= 1e-12);
    const auto ort = check_intertwining(irw, 2, 3, 1.3, f, IntertwinerKind::Orthogonal, 1.0);
    CHECK(ort.max_abs_deviation <= 1e-9);

    // exclusion with weights large enough to keep the moment basis regular
    const auto sep = two_site(-1, {3.0, 3.0}, 0.8);
    const auto sep_cl = check_intertwining(sep, 2, 3, 0.5, f, IntertwinerKind::Classical);
    CHECK(sep_cl.max_abs_deviation <= 1e-9);
    const auto sep_ort =
        check_intertwining(sep, 2, 3, 0.5, f, IntertwinerKind::Orthogonal, 0.4);
    CHECK(sep_ort.max_abs_deviation <= 1e-9);
}

TEST_CASE("orthogonal polynomial of the cheap duality reproduces the product form") {
    // (1/n!) I_n(D_cheap(xi, .), eta) = prod_x P_{xi_x}(eta_x) / (rho_x(xi_x) xi_x!)
    const auto sys = two_site(1, {1.0, 2.0});
    const double theta = 0.6;
    const auto rho = reversible_measure(sys, theta);
    const std::vector<int> xi{2, 1};
    const unsigned n = 3;
    const double rho_xi = rho.mass(xi);
    const auto f = SymmetricFn::generic(
        n, 1.0 / rho_xi, [xi, m = sys.m, rho_xi](const double* pts, std::size_t k) {
            std::vector<int> count(static_cast<std::size_t>(m), 0);
            for (std::size_t i = 0; i < k; ++i)
                ++count[static_cast<std::size_t>(static_cast<int>(pts[i]))];
            return count == xi ? 1.0 / rho_xi : 0.0;
        });
    const auto poly = orthogonal_polynomial_of(sys, theta, n, f);
    const auto ort = duality_function(sys, theta, DualityKind::Orthogonal);
    const double n_fact = 6.0;
    for (const std::vector<int>& eta :
         {std::vector<int>{0, 0}, std::vector<int>{1, 2}, std::vector<int>{3, 1},
          std::vector<int>{2, 4}}) {
        const std::vector<double> counts{static_cast<double>(eta[0]),
                                         static_cast<double>(eta[1])};
        CHECK(poly.eval(counts) / n_fact ==
              doctest::Approx(ort(xi, eta)).epsilon(1e-8));
    }
}

TEST_CASE("lowering a scalar gives the constant on the one-particle sector") {
    const auto sys = two_site(0, {1.0, 1.0});
    const auto low = lowering_matrix(sys, 1);
    CHECK(low.cols == 1);
    std::vector<double> scalar{2.5}, out(low.rows);
    vec::spmv(low, scalar.data(), out.data());
    for (double v : out) CHECK(v == 2.5);
}
