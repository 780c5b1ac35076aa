#include <doctest.h>

#include <cmath>

#include "granular/errors.hpp"
#include "granular/walk.hpp"
#include "helpers.hpp"

using namespace granular;

TEST_CASE("exact return probabilities at tiny lags") {
    CHECK(walk::return_probability_exact(1, 2) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(walk::return_probability_exact(1, 4) == doctest::Approx(0.375).epsilon(1e-14));
    CHECK(walk::return_probability_exact(2, 2) == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("enumeration matches the closed form for all reachable lags") {
    for (int lag = 2; lag <= 16; lag += 2)
        CHECK(walk::return_probability_exact(1, lag) ==
              doctest::Approx(testhelpers::walk_return_closed_form(1, lag)).epsilon(1e-12));
    for (int lag = 2; lag <= 12; lag += 2)
        CHECK(walk::return_probability_exact(2, lag) ==
              doctest::Approx(testhelpers::walk_return_closed_form(2, lag)).epsilon(1e-12));
}

TEST_CASE("enumeration bounds and parity are enforced") {
    CHECK_THROWS_AS(walk::return_probability_exact(1, 3), ValidationError);
    CHECK_THROWS_AS(walk::return_probability_exact(1, 26), ValidationError);
    CHECK_THROWS_AS(walk::return_probability_exact(2, 14), ValidationError);
    CHECK_THROWS_AS(walk::return_probability_exact(3, 2), ValidationError);
}

TEST_CASE("theoretical p_origin closed form") {
    CHECK(walk::theoretical_p_origin(1, 200) == doctest::Approx(0.056418958).epsilon(1e-6));
    CHECK(walk::theoretical_p_origin(2, 200) == doctest::Approx(0.0031830989).epsilon(1e-6));
    // asymptotic form exceeds the exact value 0.5 at t = 1
    CHECK(walk::theoretical_p_origin(1, 2) == doctest::Approx(0.56418958).epsilon(1e-6));
    CHECK(walk::theoretical_p_origin(1, 2) > walk::return_probability_exact(1, 2));
    CHECK_THROWS_AS(walk::theoretical_p_origin(3, 2), ValidationError);
    CHECK_THROWS_AS(walk::theoretical_p_origin(1, 5), ValidationError);
}

TEST_CASE("monte carlo agrees with the exact oracle within 4 sigma") {
    for (int dim : {1, 2}) {
        CAPTURE(dim);
        walk::WalkEnsembleSpec spec{dim, 12, 20000, 99};
        const auto stats =
            walk::simulate_return_statistics(spec, {2, 4, 6, 8, 10, 12});
        for (std::size_t i = 0; i < stats.lags.size(); ++i) {
            const double exact =
                walk::return_probability_exact(dim, static_cast<int>(stats.lags[i]));
            CAPTURE(stats.lags[i]);
            CHECK(std::abs(stats.p_origin[i] - exact) <= 4.0 * stats.standard_errors[i]);
        }
    }
}

TEST_CASE("simulated ensemble determinism across thread counts") {
    walk::WalkEnsembleSpec spec{2, 64, 30000, 1234};
    const auto a = walk::simulate_return_statistics(spec, {8, 16, 32, 64}, 1);
    const auto b = walk::simulate_return_statistics(spec, {8, 16, 32, 64}, 3);
    CHECK(a.hits == b.hits);
    CHECK(a.p_origin == b.p_origin);
}

TEST_CASE("lag validation") {
    walk::WalkEnsembleSpec spec{1, 64, 100, 1};
    CHECK_THROWS_AS(walk::simulate_return_statistics(spec, {}), ValidationError);
    CHECK_THROWS_AS(walk::simulate_return_statistics(spec, {7}), ValidationError);
    CHECK_THROWS_AS(walk::simulate_return_statistics(spec, {128}), ValidationError);
}

TEST_CASE("log-log slope approaches -d/2 (reduced-scale check)") {
    for (int dim : {1, 2}) {
        CAPTURE(dim);
        walk::WalkEnsembleSpec spec{dim, 512, 30000, 7};
        const auto stats = walk::simulate_return_statistics(
            spec, walk::geometric_lags(8, 512));
        const auto slope = walk::fit_return_slope(stats, 8, 512);
        CHECK(std::abs(slope.slope - (-0.5 * dim)) < 0.1);
    }
}

TEST_CASE("slope fit drops thin lags") {
    walk::WalkEnsembleSpec spec{2, 512, 20000, 5};
    const auto stats =
        walk::simulate_return_statistics(spec, walk::geometric_lags(8, 512));
    // p ~ 2/(pi t) so the latest lags sit under 100 hits with 2e4 walkers
    const auto slope = walk::fit_return_slope(stats, 8, 512);
    CHECK(slope.lags_used >= 3);
    CHECK(slope.lags_used < static_cast<int>(stats.lags.size()));
}

TEST_CASE("polya constant: analytic mode") {
    const auto one_d = walk::estimate_polya_constant(1, 1000, 10000, 1, walk::PolyaMode::analytic);
    const auto two_d = walk::estimate_polya_constant(2, 1000, 10000, 1, walk::PolyaMode::analytic);
    CHECK(one_d.value == 1.0);
    CHECK(two_d.value == 1.0);
    CHECK_THROWS_AS(
        walk::estimate_polya_constant(3, 1000, 10000, 1, walk::PolyaMode::analytic),
        ValidationError);
}

TEST_CASE("polya constant: d=2 estimate rises with horizon and stays below 1") {
    const auto short_run = walk::estimate_polya_constant(2, 1000, 20000, 3);
    const auto long_run = walk::estimate_polya_constant(2, 8000, 20000, 3);
    CHECK(short_run.value < 1.0);
    CHECK(long_run.value < 1.0);
    CHECK(long_run.value > short_run.value); // same walker streams, longer horizon
    CHECK(long_run.tail_correction == 0.0);
}

TEST_CASE("polya constant: d=3 quick estimate near the lattice constant") {
    const auto est = walk::estimate_polya_constant(3, 4000, 40000, 11);
    CHECK(est.tail_correction > 0.0);
    CHECK(est.tail_correction < 0.05);
    CHECK(std::abs(est.value - 0.3404) < 0.02);
}

TEST_CASE("polya raw fraction is non-decreasing in horizon for a fixed seed") {
    double prev = 0;
    for (std::int64_t horizon : {500, 1000, 2000, 4000}) {
        const auto est = walk::estimate_polya_constant(3, horizon, 20000, 21);
        const double raw = est.value - est.tail_correction;
        CHECK(raw >= prev);
        prev = raw;
    }
}

TEST_CASE("geometric lag ladder") {
    CHECK(walk::geometric_lags(8, 512) ==
          std::vector<std::int64_t>{8, 16, 32, 64, 128, 256, 512});
    CHECK(walk::geometric_lags(8, 12) == std::vector<std::int64_t>{8});
    CHECK_THROWS_AS(walk::geometric_lags(8, 4), ValidationError);
}
