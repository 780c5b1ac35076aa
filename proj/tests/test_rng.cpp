#include <doctest.h>

#include <cmath>
#include <vector>

#include "granular/rng.hpp"

using granular::RngStream;

TEST_CASE("streams are deterministic and distinct") {
    RngStream a(42, 7, 0, 1), b(42, 7, 0, 1), c(42, 8, 0, 1), d(43, 7, 0, 1);
    bool same = true, differs_id = false, differs_seed = false;
    for (int i = 0; i < 64; ++i) {
        const auto va = a.next_u64();
        same = same && va == b.next_u64();
        differs_id = differs_id || va != c.next_u64();
        differs_seed = differs_seed || va != d.next_u64();
    }
    CHECK(same);
    CHECK(differs_id);
    CHECK(differs_seed);
}

TEST_CASE("uniform01 moments and range") {
    RngStream rng(1, 1);
    const int n = 500000;
    double sum = 0, sum2 = 0;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform01();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
        sum2 += u * u;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    CHECK(std::abs(mean - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / n));
    CHECK(std::abs(var - 1.0 / 12.0) < 0.001);
}

TEST_CASE("bounded draws are uniform over [0, 6)") {
    RngStream rng(9, 2);
    const int n = 600000;
    std::vector<int> counts(6, 0);
    for (int i = 0; i < n; ++i) ++counts[rng.below(6)];
    const double expected = n / 6.0;
    const double sigma = std::sqrt(expected * (1.0 - 1.0 / 6.0));
    for (int k = 0; k < 6; ++k) CHECK(std::abs(counts[k] - expected) < 4.5 * sigma);
}

TEST_CASE("direction batches match the bounded-draw distribution") {
    RngStream rng(11, 3);
    std::vector<int> counts(6, 0);
    const int batches = 20000;
    std::uint8_t dirs[20];
    for (int i = 0; i < batches; ++i) {
        rng.fill_directions<6, 20>(dirs);
        for (int j = 0; j < 20; ++j) ++counts[dirs[j]];
    }
    const double n = 20.0 * batches;
    const double expected = n / 6.0;
    const double sigma = std::sqrt(expected * (1.0 - 1.0 / 6.0));
    for (int k = 0; k < 6; ++k) CHECK(std::abs(counts[k] - expected) < 4.5 * sigma);
}

TEST_CASE("poisson sampler moments") {
    for (double mean : {0.5, 7.0, 200.0}) {
        CAPTURE(mean);
        RngStream rng(5, static_cast<std::uint32_t>(mean * 10));
        const int n = 200000;
        double sum = 0, sum2 = 0;
        for (int i = 0; i < n; ++i) {
            const auto k = static_cast<double>(rng.poisson(mean));
            REQUIRE(k >= 0);
            sum += k;
            sum2 += k * k;
        }
        const double m = sum / n;
        const double v = sum2 / n - m * m;
        CHECK(std::abs(m - mean) < 4.5 * std::sqrt(mean / n));
        CHECK(std::abs(v - mean) < 0.03 * mean + 4.5 * mean * std::sqrt(2.0 / n));
    }
}

TEST_CASE("binomial sampler supports huge trial counts") {
    RngStream rng(6, 1);
    // small n*p path on an astronomically large n
    const std::int64_t trials = 1000000000000ll;
    const double p = 1e-11; // np = 10
    const int n = 100000;
    double sum = 0;
    for (int i = 0; i < n; ++i) {
        const auto k = rng.binomial(trials, p);
        REQUIRE(k >= 0);
        REQUIRE(k <= trials);
        sum += static_cast<double>(k);
    }
    CHECK(std::abs(sum / n - 10.0) < 4.5 * std::sqrt(10.0 / n));

    // normal-approximation path
    double sum2 = 0, sumsq = 0;
    for (int i = 0; i < n; ++i) {
        const auto k = static_cast<double>(rng.binomial(1000, 0.3));
        sum2 += k;
        sumsq += k * k;
    }
    const double m = sum2 / n;
    const double v = sumsq / n - m * m;
    CHECK(std::abs(m - 300.0) < 4.5 * std::sqrt(210.0 / n));
    CHECK(std::abs(v - 210.0) < 0.05 * 210.0);
}

TEST_CASE("binomial edge probabilities") {
    RngStream rng(7, 1);
    CHECK(rng.binomial(100, 0.0) == 0);
    CHECK(rng.binomial(100, 1.0) == 100);
    CHECK(rng.binomial(0, 0.5) == 0);
    for (int i = 0; i < 1000; ++i) {
        const auto k = rng.binomial(3, 0.5);
        REQUIRE(k >= 0);
        REQUIRE(k <= 3);
    }
}
