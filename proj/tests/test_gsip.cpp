#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "dualsim/gsip.hpp"
#include "dualsim/stats.hpp"

using namespace dualsim;

TEST_CASE("conductance functions") {
    const auto constant = ConductanceFn::constant(2.0);
    CHECK(constant(0.2, 0.7) == 2.0);
    CHECK(constant(0.4, 0.4) == 0.0);  // vanishing diagonal
    CHECK(constant.bound() == 2.0);

    const auto pw = ConductanceFn::piecewise({0.0, 0.5, 1.0}, {{0.5, 1.5}, {1.5, 1.0}});
    CHECK(pw(0.1, 0.9) == 1.5);
    CHECK(pw(0.9, 0.1) == 1.5);
    CHECK(pw(0.1, 0.2) == 0.5);
    CHECK(pw(0.2, 0.2) == 0.0);
    CHECK(pw.cell_of(0.49) == 0);
    CHECK(pw.cell_of(0.5) == 1);
    CHECK_THROWS(ConductanceFn::piecewise({0.0, 0.5}, {{1.0}}));  // must end at 1
    CHECK_THROWS(ConductanceFn::piecewise({0.0, 0.5, 1.0}, {{0.0, 1.0}, {2.0, 0.0}}));
}

TEST_CASE("jump rates") {
    const AlphaMeasure alpha({2.0}, {});  // uniform density, total mass 2
    const auto kappa = ConductanceFn::constant(1.5);

    // empty configuration has zero total rate
    const auto empty = q_rates({}, kappa, alpha);
    CHECK(empty.total == 0.0);

    // single particle: z = kappa * alpha(E)
    const auto single = q_rates({0.3}, kappa, alpha);
    CHECK(single.total == doctest::Approx(1.5 * 2.0));
    CHECK(single.fresh[0] == doctest::Approx(3.0));

    // an atom at the particle's own location is excluded from the fresh rate
    const AlphaMeasure with_atom({1.0}, {{0.3, 0.5}});
    const auto at_atom = q_rates({0.3}, kappa, with_atom);
    CHECK(at_atom.fresh[0] == doctest::Approx(1.5 * 1.0));
    const auto off_atom = q_rates({0.4}, kappa, with_atom);
    CHECK(off_atom.fresh[0] == doctest::Approx(1.5 * 1.5));

    // pair rates: c between distinct locations, zero between stacked ones
    const auto pair = q_rates({0.2, 0.8}, kappa, alpha);
    CHECK(pair.pair(0, 1) == 1.5);
    CHECK(pair.per_particle[0] == doctest::Approx(3.0 + 1.5));
    const auto stacked = q_rates({0.2, 0.2}, kappa, alpha);
    CHECK(stacked.pair(0, 1) == 0.0);

    // piecewise conductance with two particles in different cells
    const auto pw = ConductanceFn::piecewise({0.0, 0.5, 1.0}, {{0.5, 1.5}, {1.5, 1.0}});
    const AlphaMeasure alpha2({1.0, 3.0}, {});  // masses 0.5 and 1.5
    const auto two = q_rates({0.25, 0.75}, pw, alpha2);
    CHECK(two.fresh[0] == doctest::Approx(0.5 * 0.5 + 1.5 * 1.5));
    CHECK(two.pair(0, 1) == doctest::Approx(1.5));
    CHECK(two.total == doctest::Approx(two.per_particle[0] + two.per_particle[1]));
}

TEST_CASE("trajectories conserve particles and respect time zero") {
    const AlphaMeasure alpha({1.0, 2.0}, {{0.1, 0.3}});
    const auto kappa = ConductanceFn::constant(1.0);
    const auto eta0 = CountingMeasure::continuum({0.2, 0.6, 0.6});

    GsipConfig cfg;
    cfg.t_end = 0.0;
    cfg.seed = 5;
    CHECK(gsip_simulate(eta0, kappa, alpha, cfg) == eta0);

    cfg.t_end = 3.0;
    cfg.record_events = true;
    const auto res = labelled_gsip_simulate(eta0.points(), kappa, alpha, cfg);
    CHECK(res.positions.size() == 3);
    CHECK(!res.truncated);
    CHECK(res.events == res.log.size());
    CHECK(res.events > 0);
    for (const auto& ev : res.log) {
        CHECK(ev.time > 0.0);
        CHECK(ev.time <= 3.0);
        CHECK(ev.destination >= 0.0);
        CHECK(ev.destination < 1.0);
    }

    // same seed, same trajectory
    const auto res2 = labelled_gsip_simulate(eta0.points(), kappa, alpha, cfg);
    CHECK(res.positions == res2.positions);
    CHECK(res.events == res2.events);

    // event budget truncates and reports the partial time
    GsipConfig tight = cfg;
    tight.max_events = 2;
    const auto trunc = labelled_gsip_simulate(eta0.points(), kappa, alpha, tight);
    CHECK(trunc.truncated);
    CHECK(trunc.time_reached < 3.0);
    CHECK(trunc.events == 2);
}

TEST_CASE("single particle relocations follow alpha at long times") {
    // one particle, constant conductance: the jump chain relocates according
    // to alpha/alpha(E), so the time-t law converges to it
    const AlphaMeasure alpha({0.6, 1.4}, {});
    const auto kappa = ConductanceFn::constant(1.0);
    const std::size_t samples = 20000;
    std::size_t hits = 0;
    for (std::size_t r = 0; r < samples; ++r) {
        GsipConfig cfg;
        cfg.t_end = 12.0;
        cfg.seed = 11;
        cfg.stream = r;
        const auto res = labelled_gsip_simulate({0.1}, kappa, alpha, cfg);
        hits += res.positions[0] < 0.5 ? 1u : 0u;
    }
    const double expect = 0.3;  // mass of [0, 0.5) over the total
    const double phat = static_cast<double>(hits) / static_cast<double>(samples);
    const double se = std::sqrt(expect * (1.0 - expect) / static_cast<double>(samples));
    CHECK(std::fabs(phat - expect) <= 4.0 * se);
}

TEST_CASE("pascal sampler hits the negative binomial moments") {
    const AlphaMeasure alpha({1.2, 0.8}, {});
    const double p = 0.45;
    const std::size_t samples = 20000;
    const auto cell = Cell::interval(0.0, 0.5);
    const double mass = alpha.interval_mass(0.0, 0.5);
    MeanVar mv;
    std::size_t zeros = 0;
    for (std::size_t r = 0; r < samples; ++r) {
        const auto eta = sample_pascal(alpha, p, 21, r);
        const auto k = eta.count_in(cell);
        mv.add(static_cast<double>(k));
        zeros += k == 0 ? 1u : 0u;
    }
    const Pmf law = neg_binomial_pmf(mass, p);
    CHECK(std::fabs(mv.mean - law.mean()) <= 4.0 * std::sqrt(law.variance() / samples));
    const double p0 = law(0);
    CHECK(std::fabs(static_cast<double>(zeros) / samples - p0) <=
          4.0 * std::sqrt(p0 * (1.0 - p0) / samples));
    CHECK_THROWS(sample_pascal(alpha, 0.99, 1, 0));  // logarithmic sampling guard
}

TEST_CASE("poisson sampler mean") {
    const AlphaMeasure alpha({2.5}, {});
    MeanVar mv;
    const std::size_t samples = 20000;
    for (std::size_t r = 0; r < samples; ++r)
        mv.add(static_cast<double>(sample_poisson(alpha, 3, r).total()));
    CHECK(std::fabs(mv.mean - 2.5) <= 4.0 * std::sqrt(2.5 / samples));
}

TEST_CASE("reduction to the discrete inclusion system") {
    const auto pw = ConductanceFn::piecewise({0.0, 0.5, 1.0}, {{0.3, 2.0}, {2.0, 0.7}});
    const AlphaMeasure alpha({1.0, 3.0}, {{0.75, 0.25}});
    const auto sys = reduce_to_discrete(pw, alpha);
    CHECK(sys.m == 2);
    CHECK(sys.sigma == 1);
    CHECK(sys.c[0][1] == 2.0);
    CHECK(sys.c[0][0] == 0.0);  // diagonal levels do not enter the count chain
    CHECK(sys.alpha[0] == doctest::Approx(0.5));
    CHECK(sys.alpha[1] == doctest::Approx(1.75));
    CHECK_THROWS(reduce_to_discrete(ConductanceFn::constant(1.0), alpha));

    const auto cells = partition_cells(pw);
    CHECK(cells.size() == 2);
    CHECK(cells[1].lo == 0.5);
}

TEST_CASE("total jump rate respects the a-priori bound") {
    // z <= n * bound(c) * (alpha(E) + n) on every reachable state
    const AlphaMeasure alpha({1.5, 0.7}, {{0.33, 0.4}});
    const auto pw = ConductanceFn::piecewise({0.0, 0.4, 1.0}, {{0.8, 1.7}, {1.7, 0.2}});
    CounterRng rng(61, 0);
    for (int rep = 0; rep < 30; ++rep) {
        std::vector<double> pts;
        const int n = 1 + static_cast<int>(rng.uniform() * 5);
        for (int i = 0; i < n; ++i)
            pts.push_back(!pts.empty() && rng.uniform() < 0.3 ? pts.back()
                                                              : rng.uniform());
        const auto rates = q_rates(pts, pw, alpha);
        const double bound = static_cast<double>(n) * pw.bound() *
                             (alpha.total() + static_cast<double>(n));
        CHECK(rates.total <= bound + 1e-12);
    }
}

TEST_CASE("pascal intensity vanishes with p") {
    std::size_t empty_draws = 0;
    for (std::size_t r = 0; r < 200; ++r)
        empty_draws += sample_pascal(AlphaMeasure({1.0}, {}), 0.001, 13, r).total() == 0;
    CHECK(empty_draws >= 198);  // intensity ~ 1e-3
}

TEST_CASE("stacked pair stays exchangeable") {
    // both labels start at the same point, so the two marginal laws agree
    const AlphaMeasure alpha({1.0, 1.0}, {});
    const auto kappa = ConductanceFn::constant(1.0);
    MeanVar first, second;
    const std::size_t samples = 20000;
    for (std::size_t r = 0; r < samples; ++r) {
        GsipConfig cfg;
        cfg.t_end = 1.0;
        cfg.seed = 23;
        cfg.stream = r;
        const auto res = labelled_gsip_simulate({0.4, 0.4}, kappa, alpha, cfg);
        first.add(res.positions[0]);
        second.add(res.positions[1]);
    }
    const double se = std::sqrt(first.variance() / samples + second.variance() / samples);
    CHECK(std::fabs(first.mean - second.mean) <= 3.5 * se);
}
