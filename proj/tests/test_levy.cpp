#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "granular/errors.hpp"
#include "granular/levy.hpp"
#include "granular/stats.hpp"
#include "helpers.hpp"

using namespace granular;

namespace {

std::vector<double> draw_steps(const levy::StepDistribution& dist, int n, std::uint64_t seed) {
    RngStream rng(seed, 0, 0, 0xBEEF);
    std::vector<double> xs(static_cast<std::size_t>(n));
    for (auto& x : xs) x = levy::sample_step(dist, rng);
    return xs;
}

} // namespace

TEST_CASE("uniform steps: range and moments") {
    const auto dist = levy::StepDistribution::uniform(1.0);
    const auto xs = draw_steps(dist, 1000000, 1);
    double sum = 0, sum2 = 0;
    for (double x : xs) {
        REQUIRE(x >= -1.0);
        REQUIRE(x <= 1.0);
        sum += x;
        sum2 += x * x;
    }
    const double n = static_cast<double>(xs.size());
    CHECK(std::abs(sum / n) < 3.0 / std::sqrt(3.0 * n));
    CHECK(std::abs(sum2 / n - 1.0 / 3.0) < 3.0 * std::sqrt(4.0 / 45.0 / n));
}

TEST_CASE("pareto steps: magnitude floor is exact") {
    const auto dist = levy::StepDistribution::pareto(0.9, 2.5);
    for (double x : draw_steps(dist, 20000, 2)) CHECK(std::abs(x) >= 2.5);
}

TEST_CASE("pareto steps: empirical tail exponent") {
    const auto dist = levy::StepDistribution::pareto(1.5, 1.0);
    auto xs = draw_steps(dist, 1000000, 3);
    for (auto& x : xs) x = std::abs(x);
    std::sort(xs.begin(), xs.end());
    std::vector<double> lz, lp;
    const double n = static_cast<double>(xs.size());
    for (double z = 1.0; z <= 100.0; z *= 1.6) {
        const auto above = xs.end() - std::upper_bound(xs.begin(), xs.end(), z);
        if (above < 100) break;
        lz.push_back(std::log(z));
        lp.push_back(std::log(static_cast<double>(above) / n));
    }
    const auto fit = stats::fit_line(lz, lp);
    CHECK(std::abs(fit.slope - (-1.5)) < 0.05);
}

TEST_CASE("pareto sampler matches the target law (KS gate)") {
    for (double alpha : {0.8, 1.5, 3.0}) {
        CAPTURE(alpha);
        const auto dist = levy::StepDistribution::pareto(alpha, 1.0);
        auto xs = draw_steps(dist, 1000000, 7);
        for (auto& x : xs) x = std::abs(x);
        const double ks = testhelpers::ks_statistic(
            std::move(xs), [&](double z) { return z < 1.0 ? 0.0 : 1.0 - std::pow(z, -alpha); });
        CHECK(ks < 0.005);
    }
}

TEST_CASE("flights accumulate steps and stay deterministic") {
    const auto dist = levy::StepDistribution::uniform(1.0);
    const auto one_step = levy::simulate_flight(dist, 1, 500, 11);
    for (double v : one_step.at_time(0)) CHECK(std::abs(v) <= 1.0);

    const auto a = levy::simulate_flight_at(dist, {16, 64}, 400, 12, 1);
    const auto b = levy::simulate_flight_at(dist, {16, 64}, 400, 12, 3);
    CHECK(a.values == b.values);
    CHECK(a.max_abs_step == b.max_abs_step);
    CHECK_THROWS_AS(a.time_index(5), ValidationError);
}

TEST_CASE("uniform flight width follows sqrt(t/3) * D") {
    const auto dist = levy::StepDistribution::uniform(2.0);
    const auto ensemble = levy::simulate_flight_at(dist, {16, 64, 256}, 40000, 13);
    for (std::size_t ti = 0; ti < 3; ++ti) {
        const auto column = ensemble.at_time(ti);
        const double sd = std::sqrt(stats::variance(column));
        const double expected =
            2.0 * std::sqrt(static_cast<double>(ensemble.times[ti]) / 3.0);
        CHECK(sd == doctest::Approx(expected).epsilon(0.03));
    }
}

TEST_CASE("largest single step grows like t^(1/alpha)") {
    const auto dist = levy::StepDistribution::pareto(1.5, 1.0);
    const auto ensemble = levy::simulate_flight(dist, 1024, 4000, 14);
    auto maxima = ensemble.max_abs_step;
    const double median_max = stats::median(std::move(maxima));
    const double predicted = std::pow(1024.0, 1.0 / 1.5);
    CHECK(median_max > predicted / 2.0);
    CHECK(median_max < predicted * 2.0);
}

TEST_CASE("central peak slopes: gaussian and fractal regimes (reduced scale)") {
    const std::vector<std::int64_t> lags{16, 32, 64, 128, 256, 512, 1024};
    struct Case {
        levy::StepDistribution dist;
        double expected;
        double tolerance;
    };
    const Case cases[] = {
        {levy::StepDistribution::uniform(1.0), -0.5, 0.05},
        {levy::StepDistribution::pareto(1.5, 1.0), -1.0 / 1.5, 0.07},
        {levy::StepDistribution::pareto(3.0, 1.0), -0.5, 0.05},
    };
    for (const auto& c : cases) {
        CAPTURE(c.dist.label());
        const auto ensemble = levy::simulate_flight_at(c.dist, lags, 30000, 15);
        const auto peak = levy::central_peak_estimate(ensemble, lags);
        CHECK(std::abs(peak.slope - c.expected) < c.tolerance);

        const auto width = levy::width_scaling(ensemble, lags);
        CHECK(std::abs(width.exponent + c.expected) < 0.07); // reciprocal scaling
        CHECK(std::abs(peak.slope + width.exponent) < 0.05); // peak-width duality

        // stable-shape sanity band: peak * width is O(1) at every lag
        for (std::size_t i = 0; i < peak.lags.size(); ++i) {
            const double product = peak.p_origin_hat[i] * peak.sigma_hat[i];
            CHECK(product > 0.1);
            CHECK(product < 10.0);
        }
    }
}

TEST_CASE("single-step dominance below alpha = 2") {
    const std::vector<std::int64_t> lags{1024};
    auto dominance = [&](double alpha) {
        const auto ensemble = levy::simulate_flight_at(
            levy::StepDistribution::pareto(alpha, 1.0), lags, 20000, 16);
        const auto displacement = ensemble.at_time(0);
        std::vector<std::size_t> order(ensemble.paths);
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return std::abs(displacement[a]) > std::abs(displacement[b]);
        });
        std::vector<double> fractions;
        for (std::size_t i = 0; i < order.size() / 10; ++i) {
            const auto p = order[i];
            fractions.push_back(ensemble.max_abs_step[p] / std::abs(displacement[p]));
        }
        return stats::median(std::move(fractions));
    };
    const double f12 = dominance(1.2);
    const double f18 = dominance(1.8);
    CHECK(f12 > 0.5);
    CHECK(f18 > 0.5);
    CHECK(f12 > f18); // dominance strengthens as alpha falls
}

TEST_CASE("regime classification") {
    CHECK(levy::classify_regime(2.5) == levy::Regime::gaussian);
    CHECK(levy::classify_regime(1.5) == levy::Regime::fractal);
    CHECK(levy::classify_regime(2.0) == levy::Regime::fractal);
    CHECK(levy::classify_regime(1.0) == levy::Regime::intermittent);
    CHECK(levy::classify_regime(0.8) == levy::Regime::intermittent);
    CHECK_THROWS_AS(levy::classify_regime(0.0), ValidationError);
    CHECK(levy::regime_name(levy::Regime::fractal) == "fractal");
}

TEST_CASE("overlapping-increment mode on a single series") {
    RngStream rng(77, 0, 0, 1);
    const auto dist = levy::StepDistribution::uniform(1.0);
    std::vector<double> series(20000);
    double x = 0;
    for (auto& v : series) {
        x += levy::sample_step(dist, rng);
        v = x;
    }
    const std::vector<std::int64_t> lags{8, 16, 32, 64, 128};
    const auto peak = levy::central_peak_estimate(series, lags);
    CHECK(std::abs(peak.slope - (-0.5)) < 0.1);
    CHECK_THROWS_AS(levy::central_peak_estimate(series, {4000}), ValidationError);
}

TEST_CASE("degenerate inputs are rejected") {
    const std::vector<double> flat(8000, 1.0);
    CHECK_THROWS_AS(levy::central_peak_estimate(flat, {8, 16, 32}), NumericError);
    const std::vector<double> tiny(900, 0.0);
    // 900/10 = 90 < smallest lag -> every lag violates the series precondition
    CHECK_THROWS_AS(levy::central_peak_estimate(tiny, {128, 256, 512}), ValidationError);
    CHECK_THROWS_AS(levy::StepDistribution::pareto(-1.0), ValidationError);
    CHECK_THROWS_AS(levy::StepDistribution::uniform(0.0), ValidationError);
}
