#include <doctest.h>

#include <cmath>
#include <map>

#include "granular/errors.hpp"
#include "granular/lattice.hpp"
#include "helpers.hpp"

using namespace granular;

TEST_CASE("poisson pmf") {
    CHECK(lattice::poisson_pmf(0.0, 0) == 1.0);
    CHECK(lattice::poisson_pmf(0.0, 3) == 0.0);
    CHECK(lattice::poisson_pmf(1.0, 3) == doctest::Approx(std::exp(-1.0) / 6.0).epsilon(1e-12));
    CHECK(lattice::poisson_pmf(2.0, 2) == doctest::Approx(2.0 * std::exp(-2.0)).epsilon(1e-12));
    CHECK_THROWS_AS(lattice::poisson_pmf(-1.0, 0), ValidationError);
}

TEST_CASE("initial resource counts follow the Poisson law (chi-squared gate)") {
    const auto state = lattice::init_lattice(2, 100, 1.0, 0, 2024);
    std::map<int, int> histogram;
    for (auto a : state.a_count) ++histogram[a];

    // pool bins so every expected count is >= 5
    const double n = static_cast<double>(state.site_count());
    double chi2 = 0;
    int bins = 0;
    int k = 0;
    double pooled_expected = 0, pooled_observed = 0;
    const int k_max = 12;
    for (; k <= k_max; ++k) {
        const double expected =
            k < k_max ? n * lattice::poisson_pmf(1.0, k)
                      : n * (1.0 - [&] {
                            double c = 0;
                            for (int j = 0; j < k_max; ++j) c += lattice::poisson_pmf(1.0, j);
                            return c;
                        }());
        const double observed = histogram.count(k) ? histogram[k] : 0;
        pooled_expected += expected;
        pooled_observed += observed;
        if (pooled_expected >= 5.0) {
            chi2 += (pooled_observed - pooled_expected) * (pooled_observed - pooled_expected) /
                    pooled_expected;
            ++bins;
            pooled_expected = pooled_observed = 0;
        }
    }
    REQUIRE(bins >= 4);
    const double critical = testhelpers::chi2_quantile(0.99, bins - 1);
    CHECK(chi2 < critical); // p > 0.01
}

TEST_CASE("init edge cases") {
    const auto empty = lattice::init_lattice(2, 16, 0.0, 5, 1);
    CHECK(empty.total_a() == 0);
    CHECK(empty.total_k() == doctest::Approx(5.0 * 256));

    // expected count of sites with A >= 4 at mean 0.5 on a 200x200 grid
    const auto state = lattice::init_lattice(2, 200, 0.5, 0, 77);
    double tail = 0;
    for (int k = 0; k < 4; ++k) tail += lattice::poisson_pmf(0.5, k);
    const double expected = 40000.0 * (1.0 - tail); // ~70
    int observed = 0;
    for (auto a : state.a_count)
        if (a >= 4) ++observed;
    CHECK(std::abs(observed - expected) < 3.0 * std::sqrt(expected));
}

TEST_CASE("naive growth rate and survival condition") {
    CHECK(lattice::naive_growth_rate({0.1, 0.3, 0, 0}, 1.0) == doctest::Approx(-0.2));
    CHECK(lattice::naive_growth_rate({0.15, 0.15, 0, 0}, 1.0) == doctest::Approx(0.0));
    CHECK(lattice::naive_growth_rate({1.0, 0.5, 0, 0}, 1.0) == doctest::Approx(0.5));

    CHECK(lattice::survival_condition({0.01, 0.9, 1.0, 0}, 2));  // d<=2: any s>0
    CHECK(lattice::survival_condition({0.7, 0, 1.0, 0}, 3));     // 0.7 > 0.659563
    CHECK_FALSE(lattice::survival_condition({0.5, 0, 1.0, 0}, 3));
    CHECK(lattice::survival_condition({0.1, 0, 0.0, 0}, 3)); // D_A = 0: trivially true
    CHECK_FALSE(lattice::survival_condition({0.0, 0, 0.0, 0}, 2));
}

TEST_CASE("zero-rate step leaves the state unchanged") {
    auto state = lattice::init_lattice(2, 8, 1.5, 3, 5);
    const auto a0 = state.a_count;
    const auto k0 = state.k_count;
    lattice::step(state, {0, 0, 0, 0}, 0.25);
    CHECK(state.a_count == a0);
    CHECK(state.k_count == k0);
    CHECK(state.time == doctest::Approx(0.25));
}

TEST_CASE("pure death matches the exact discrete decay oracle") {
    auto state = lattice::init_lattice(1, 2, 0.0, 500000, 9);
    const double k0 = state.total_k();
    const double dt = 0.01;
    lattice::ReactionRates rates{0, 1.0, 0, 0};
    for (int i = 0; i < 100; ++i) lattice::step(state, rates, dt);
    const double survive = std::pow(1.0 - dt, 100); // exact per-agent survival
    const double expected = k0 * survive;
    const double sigma = std::sqrt(k0 * survive * (1.0 - survive));
    CHECK(std::abs(state.total_k() - expected) < 4.0 * sigma);
    // continuum limit e^{-delta t} within discretization error
    CHECK(state.total_k() / k0 == doctest::Approx(std::exp(-1.0)).epsilon(0.02));
}

TEST_CASE("pure birth matches the exact discrete growth oracle") {
    auto state = lattice::init_lattice(1, 2, 0.0, 100000, 9);
    state.a_count.assign(state.site_count(), 3); // fixed resources
    const double k0 = state.total_k();
    const double dt = 0.05;
    lattice::ReactionRates rates{0.1, 0, 0, 0};
    for (int i = 0; i < 100; ++i) lattice::step(state, rates, dt);
    const double factor = std::pow(1.0 + 0.1 * 3 * dt, 100);
    CHECK(state.total_k() / k0 == doctest::Approx(factor).epsilon(0.01));
    CHECK(state.total_k() / k0 == doctest::Approx(std::exp(0.1 * 3 * 5.0)).epsilon(0.03));
}

TEST_CASE("resources are conserved exactly through diffusion and reactions") {
    auto state = lattice::init_lattice(2, 16, 2.0, 3, 31);
    const auto a_total = state.total_a();
    lattice::ReactionRates rates{0.2, 0.1, 0.5, 0.5};
    lattice::run(state, rates, 5.0, 1.0);
    CHECK(state.total_a() == a_total);
}

TEST_CASE("k-diffusion alone conserves the k population exactly") {
    auto state = lattice::init_lattice(3, 6, 1.0, 7, 13);
    const double k_total = state.total_k();
    lattice::ReactionRates rates{0, 0, 0, 0.9};
    for (int i = 0; i < 40; ++i) lattice::step(state, rates, 0.5);
    CHECK(state.total_k() == k_total);
}

TEST_CASE("well-mixed mode reproduces scalar Malthus dynamics") {
    // >= 1e6 agents, g = -0.1
    auto state = lattice::init_lattice(2, 32, 1.0, 1000, 17);
    const double k0 = state.total_k();
    lattice::ReactionRates rates{0.3, 0.4, 0, 0};
    lattice::RunOptions options;
    options.well_mixed = true;
    options.max_dt = 0.02;
    lattice::run(state, rates, 10.0, 2.0, options);
    const double g = lattice::naive_growth_rate(rates, state.mean_a());
    CHECK(std::abs(std::log(state.total_k()) - std::log(k0) - g * 10.0) < 0.05 * std::abs(g) * 10.0);
}

TEST_CASE("granular resources beat the scalar prediction (convexity)") {
    auto state = lattice::init_lattice(2, 32, 1.0, 100, 23);
    const double k0 = state.total_k();
    lattice::ReactionRates rates{0.2, 0.25, 0, 0};
    const double g = lattice::naive_growth_rate(rates, state.mean_a()); // < 0
    REQUIRE(g < 0);
    lattice::run(state, rates, 10.0, 2.0);
    CHECK(state.total_k() / k0 > std::exp(g * 10.0));
}

TEST_CASE("runs are deterministic per seed and across thread counts") {
    lattice::ReactionRates rates{0.2, 0.15, 0.3, 0.3};
    auto run_once = [&](int threads) {
        auto state = lattice::init_lattice(2, 12, 1.0, 4, 55);
        lattice::RunOptions options;
        options.threads = threads;
        return lattice::run(state, rates, 4.0, 1.0, options);
    };
    const auto a = run_once(1);
    const auto b = run_once(1);
    const auto c = run_once(3);
    CHECK(a.k_total == b.k_total);
    CHECK(a.k_total == c.k_total);
    CHECK(a.max_site_k == c.max_site_k);
}

TEST_CASE("site counts freeze at the overflow guard and flag the run") {
    auto state = lattice::init_lattice(1, 2, 0.0, 900000000000000ull, 3);
    state.a_count.assign(state.site_count(), 10);
    lattice::ReactionRates rates{1.0, 0, 0, 0};
    lattice::RunSummary summary = lattice::run(state, rates, 2.0, 0.5);
    CHECK(summary.overflowed());
    CHECK(state.overflowed);
    CHECK(state.max_site_k() == lattice::kOverflowGuard);
}

TEST_CASE("dt cap is enforced") {
    auto state = lattice::init_lattice(2, 8, 1.0, 1, 2);
    CHECK_THROWS_AS(lattice::step(state, {0, 2.0, 0, 0}, 0.3), ValidationError);
    CHECK_THROWS_AS(lattice::step(state, {0, 0.1, 0, 0}, -1.0), ValidationError);
    CHECK_THROWS_AS(lattice::init_lattice(4, 8, 1.0, 1, 2), ValidationError);
    CHECK_THROWS_AS(lattice::init_lattice(2, 1, 1.0, 1, 2), ValidationError);
}

TEST_CASE("well-mixed control with negative g decays") {
    auto state = lattice::init_lattice(2, 24, 0.5, 10, 40);
    lattice::ReactionRates rates{0.08, 0.08, 0.005, 0.02}; // g = 0.04 - 0.08 < 0
    lattice::RunOptions options;
    options.well_mixed = true;
    const auto summary = lattice::run(state, rates, 30.0, 5.0, options);
    CHECK(summary.k_total.back() < summary.k_total.front());
}
