#include <doctest.h>

#include <cmath>

#include "granular/errors.hpp"
#include "granular/rng.hpp"
#include "granular/sectors.hpp"

using namespace granular;

namespace {

sectors::GrowthMatrix fig2_matrix() {
    return sectors::GrowthMatrix::from_rows({{-0.35, 0.1}, {0.1, 0.15}});
}

sectors::GrowthMatrix fig3_swapped() {
    return sectors::GrowthMatrix::from_rows({{0.15, 0.1}, {0.1, -0.35}});
}

std::vector<double> grid(double t_end, double dt) {
    std::vector<double> g;
    for (double t = 0; t <= t_end + 1e-9; t += dt) g.push_back(t);
    return g;
}

constexpr double kFig2LambdaMax = 0.16925824035672520;
constexpr double kFig2LambdaMin = -0.36925824035672520;

} // namespace

TEST_CASE("policy matrix construction") {
    const auto g = sectors::build_policy_matrix(0.02, -0.05, 0.1);
    CHECK(g.at(0, 0) == doctest::Approx(-0.03));
    CHECK(g.at(0, 1) == doctest::Approx(0.05));
    CHECK(g.at(1, 0) == doctest::Approx(0.05));
    CHECK(g.at(1, 1) == doctest::Approx(-0.10));

    const auto decoupled = sectors::build_policy_matrix(0.3, -0.2, 0.0);
    CHECK(decoupled.at(0, 1) == 0.0);
    CHECK(decoupled.at(0, 0) == doctest::Approx(0.3));

    // quadratic-formula oracle: no recovery at mu = 0.1
    const auto eigen = sectors::eigen_solve(g);
    CHECK(eigen.lambda_max == doctest::Approx(-0.00396722192133).epsilon(1e-8));
    CHECK(eigen.lambda_max < 0);
    CHECK_THROWS_AS(sectors::build_policy_matrix(0.1, 0.1, -0.5), ValidationError);
}

TEST_CASE("eigen decomposition of the two-sector shock matrix") {
    const auto eigen = sectors::eigen_solve(fig2_matrix());
    REQUIRE(eigen.values.size() == 2);
    CHECK(eigen.lambda_max == doctest::Approx(kFig2LambdaMax).epsilon(1e-10));
    const double other = eigen.values[1 - eigen.lambda_max_index].real();
    CHECK(other == doctest::Approx(kFig2LambdaMin).epsilon(1e-10));
    CHECK(eigen.complete_basis);
    CHECK(eigen.residual < 1e-10 * fig2_matrix().max_abs());

    // symmetric matrix: orthogonal eigenvectors
    double dot = 0;
    for (int i = 0; i < 2; ++i)
        dot += (eigen.vector_at(0, i) * std::conj(eigen.vector_at(1, i))).real();
    CHECK(std::abs(dot) < 1e-12);
}

TEST_CASE("scaled identity has a complete basis and equal eigenvalues") {
    const auto g = sectors::GrowthMatrix::diagonal({0.07, 0.07});
    const auto eigen = sectors::eigen_solve(g);
    CHECK(eigen.complete_basis);
    CHECK(eigen.values[0].real() == doctest::Approx(0.07));
    CHECK(eigen.values[1].real() == doctest::Approx(0.07));
    const auto value = sectors::analytic_solution(g, std::vector<double>{2.0, 3.0}, 10.0);
    CHECK(value[0] == doctest::Approx(2.0 * std::exp(0.7)).epsilon(1e-12));
    CHECK(value[1] == doctest::Approx(3.0 * std::exp(0.7)).epsilon(1e-12));
}

TEST_CASE("eigen residuals stay tiny on random transfer matrices") {
    RngStream rng(404, 1);
    for (int n : {2, 3, 5}) {
        for (int trial = 0; trial < 20; ++trial) {
            auto g = sectors::GrowthMatrix::zero(n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    g.at(i, j) = i == j ? rng.uniform(-1.0, 1.0) : rng.uniform(0.0, 1.0);
            const auto eigen = sectors::eigen_solve(g);
            CHECK(eigen.residual < 1e-10 * std::max(1.0, g.max_abs()));
        }
    }
}

TEST_CASE("defective matrices are flagged and analytic evaluation refuses them") {
    // Jordan block: repeated eigenvalue, one eigenvector
    const auto jordan2 = sectors::GrowthMatrix::from_rows({{0.5, 0.0}, {1.0, 0.5}});
    const auto eigen2 = sectors::eigen_solve(jordan2);
    CHECK_FALSE(eigen2.complete_basis);
    CHECK_THROWS_AS(sectors::analytic_solution(jordan2, std::vector<double>{1.0, 1.0}, 1.0),
                    NumericError);

    const auto jordan3 = sectors::GrowthMatrix::from_rows(
        {{0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}, {0.0, 0.0, 0.0}});
    CHECK_FALSE(sectors::eigen_solve(jordan3).complete_basis);

    // the automatic integrator falls back to the numerical route
    sectors::ShockSchedule schedule{{{0.0, jordan2}}, {1.0, 1.0}};
    const auto g = grid(2.0, 0.5);
    const auto automatic = sectors::integrate(schedule, g);
    const auto numerical = sectors::integrate(schedule, g, sectors::IntegrationMethod::numerical);
    for (std::size_t i = 0; i < automatic.k.size(); ++i)
        CHECK(automatic.k[i] == doctest::Approx(numerical.k[i]).epsilon(1e-9));
    CHECK_THROWS_AS(sectors::integrate(schedule, g, sectors::IntegrationMethod::analytic),
                    NumericError);
}

TEST_CASE("analytic solution basics") {
    const auto zero = sectors::GrowthMatrix::zero(3);
    const std::vector<double> k0{1.0, 2.0, 3.0};
    const auto still = sectors::analytic_solution(zero, k0, 7.5);
    for (int i = 0; i < 3; ++i) CHECK(still[i] == doctest::Approx(k0[i]).epsilon(1e-14));
}

TEST_CASE("shock trajectory: crossing exponentials and a single smooth minimum") {
    sectors::ShockSchedule schedule{{{0.0, fig2_matrix()}}, {1.0, 0.01}};
    const auto g = grid(16.0, 0.1);
    const auto trajectory = sectors::integrate(schedule, g);

    // the fading sector initially decays at close to its intrinsic rate
    const std::size_t i5 = 5; // t = 0.5
    CHECK(trajectory.state_at(i5)[0] ==
          doctest::Approx(std::exp(-0.35 * 0.5)).epsilon(0.01));
    // the rising sector grows from the start
    CHECK(trajectory.state_at(i5)[1] > 0.01);

    int minima = 0;
    for (std::size_t i = 1; i + 1 < trajectory.k_tot.size(); ++i)
        if (trajectory.k_tot[i] < trajectory.k_tot[i - 1] &&
            trajectory.k_tot[i] < trajectory.k_tot[i + 1])
            ++minima;
    CHECK(minima == 1);
}

TEST_CASE("numerical integration matches the eigen-analytic route to 1e-8") {
    sectors::ShockSchedule schedule{{{0.0, fig2_matrix()}}, {1.0, 0.01}};
    const auto g = grid(60.0, 0.25);
    const auto analytic = sectors::integrate(schedule, g, sectors::IntegrationMethod::analytic);
    const auto numerical = sectors::integrate(schedule, g, sectors::IntegrationMethod::numerical);
    double max_error = 0;
    for (std::size_t i = 0; i < analytic.k.size(); ++i)
        max_error = std::max(max_error, std::abs(analytic.k[i] - numerical.k[i]));
    CHECK(max_error < 1e-8);
}

TEST_CASE("growth rates align with lambda_max (Frobenius-Perron)") {
    sectors::ShockSchedule schedule{{{0.0, fig2_matrix()}}, {1.0, 0.01}};
    const auto trajectory = sectors::integrate(schedule, grid(60.0, 0.5));
    const auto rates = trajectory.rates_at(trajectory.times.size() - 1);
    CHECK(std::abs(rates[0] - kFig2LambdaMax) < 1e-3);
    CHECK(std::abs(rates[1] - kFig2LambdaMax) < 1e-3);
}

TEST_CASE("asymptotic sector ratio") {
    CHECK(sectors::asymptotic_ratio(fig2_matrix()) == doctest::Approx(0.19258240).epsilon(1e-6));
    CHECK(sectors::asymptotic_ratio(sectors::GrowthMatrix::diagonal({-1.0, 1.0})) == 0.0);
    CHECK_THROWS_AS(sectors::asymptotic_ratio(sectors::GrowthMatrix::diagonal({0.3, 0.3})),
                    NumericError);

    sectors::ShockSchedule schedule{{{0.0, fig2_matrix()}}, {1.0, 0.01}};
    const auto trajectory = sectors::integrate(schedule, grid(60.0, 0.5));
    const auto last = trajectory.state_at(trajectory.times.size() - 1);
    CHECK(std::abs(last[0] / last[1] - sectors::asymptotic_ratio(fig2_matrix())) < 1e-3);
}

TEST_CASE("positivity: transfer matrices keep positive states positive") {
    RngStream rng(505, 1);
    for (int trial = 0; trial < 20; ++trial) {
        auto g = sectors::GrowthMatrix::zero(3);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                g.at(i, j) = i == j ? rng.uniform(-1.0, 0.5) : rng.uniform(0.0, 0.5);
        std::vector<double> k0{rng.uniform(0.01, 2.0), rng.uniform(0.01, 2.0),
                               rng.uniform(0.01, 2.0)};
        sectors::ShockSchedule schedule{{{0.0, g}}, k0};
        const auto trajectory = sectors::integrate(schedule, grid(10.0, 0.25));
        for (double v : trajectory.k) CHECK(v > 0.0);
    }
}

TEST_CASE("superposition and segment-splitting invariances") {
    sectors::ShockSchedule base{{{0.0, fig2_matrix()}, {8.0, fig3_swapped()}}, {1.0, 0.01}};
    const auto g = grid(12.0, 0.25);

    const auto t1 = sectors::integrate(base, g);
    sectors::ShockSchedule scaled = base;
    scaled.initial_state = {2.0 * 1.0 + 3.0 * 0.5, 2.0 * 0.01 + 3.0 * 0.25};
    sectors::ShockSchedule other = base;
    other.initial_state = {0.5, 0.25};
    const auto t2 = sectors::integrate(other, g);
    const auto t3 = sectors::integrate(scaled, g);
    for (std::size_t i = 0; i < t3.k.size(); ++i) {
        const double expected = 2.0 * t1.k[i] + 3.0 * t2.k[i];
        CHECK(t3.k[i] == doctest::Approx(expected).epsilon(1e-9));
    }

    // splitting a constant-G segment changes nothing
    sectors::ShockSchedule split = base;
    split.segments = {{0.0, fig2_matrix()}, {4.3, fig2_matrix()}, {8.0, fig3_swapped()}};
    const auto t4 = sectors::integrate(split, g);
    for (std::size_t i = 0; i < t1.k.size(); ++i)
        CHECK(t4.k[i] == doctest::Approx(t1.k[i]).epsilon(1e-9));
}

TEST_CASE("negative average intrinsic rate can still grow (matrix convexity)") {
    const auto g = fig2_matrix();
    CHECK((g.at(0, 0) + g.at(1, 1)) / 2.0 < 0);
    const auto eigen = sectors::eigen_solve(g);
    CHECK(eigen.lambda_max > 0);
    sectors::ShockSchedule schedule{{{0.0, g}}, {1.0, 0.01}};
    const auto trajectory = sectors::integrate(schedule, grid(60.0, 1.0));
    CHECK(trajectory.k_tot.back() > trajectory.k_tot.front());
}

TEST_CASE("cusp detection on the two-shock trajectory") {
    sectors::ShockSchedule schedule{{{0.0, fig2_matrix()}, {8.0, fig3_swapped()}}, {1.0, 0.01}};
    const auto trajectory = sectors::integrate(schedule, grid(16.0, 0.1));
    const auto extrema = sectors::detect_cusps(trajectory.k_tot, trajectory.times);
    int cusp_max = 0, cusp_min = 0, smooth_min = 0;
    double cusp_time = -1;
    for (const auto& e : extrema) {
        if (e.kind == sectors::ExtremumKind::cusp_max) {
            ++cusp_max;
            cusp_time = e.time;
        }
        if (e.kind == sectors::ExtremumKind::cusp_min) ++cusp_min;
        if (e.kind == sectors::ExtremumKind::smooth_min) ++smooth_min;
    }
    CHECK(cusp_max == 1);
    CHECK(std::abs(cusp_time - 8.0) <= 0.1 + 1e-9);
    CHECK(cusp_min == 0);
    CHECK(smooth_min == 2);
}

TEST_CASE("single-shock trajectory has no cusp and one smooth minimum") {
    sectors::ShockSchedule schedule{{{0.0, fig2_matrix()}}, {1.0, 0.01}};
    const auto trajectory = sectors::integrate(schedule, grid(16.0, 0.1));
    const auto extrema = sectors::detect_cusps(trajectory.k_tot, trajectory.times);
    REQUIRE(extrema.size() == 1);
    CHECK(extrema[0].kind == sectors::ExtremumKind::smooth_min);
}

TEST_CASE("monotone exponentials produce no extrema") {
    std::vector<double> times, values;
    for (int i = 0; i < 100; ++i) {
        times.push_back(0.1 * i);
        values.push_back(std::exp(0.1 * 0.1 * i));
    }
    CHECK(sectors::detect_cusps(values, times).empty());
}

TEST_CASE("cusp detector input validation") {
    std::vector<double> times{0, 1, 2}, values{1, 2, 1};
    CHECK_THROWS_AS(sectors::detect_cusps(values, times), ValidationError);
    std::vector<double> t2, v2;
    for (int i = 0; i < 40; ++i) {
        t2.push_back(i);
        v2.push_back(i == 20 ? -1.0 : 1.0);
    }
    CHECK_THROWS_AS(sectors::detect_cusps(v2, t2), ValidationError);
    std::vector<double> t3 = t2;
    t3[30] += 0.5; // non-uniform grid
    std::vector<double> v3(40, 1.0);
    CHECK_THROWS_AS(sectors::detect_cusps(v3, t3), ValidationError);
}

TEST_CASE("schedule validation") {
    CHECK_THROWS_AS(
        (sectors::ShockSchedule{{{1.0, fig2_matrix()}}, {1.0, 1.0}}).validate(),
        ValidationError);
    CHECK_THROWS_AS(
        (sectors::ShockSchedule{{{0.0, fig2_matrix()}, {0.0, fig2_matrix()}}, {1.0, 1.0}})
            .validate(),
        ValidationError);
    CHECK_THROWS_AS((sectors::ShockSchedule{{{0.0, fig2_matrix()}}, {1.0, 0.0}}).validate(),
                    ValidationError);
    CHECK_THROWS_AS((sectors::ShockSchedule{{{0.0, fig2_matrix()}}, {1.0, 1.0, 1.0}}).validate(),
                    ValidationError);
    CHECK_THROWS_AS(sectors::GrowthMatrix::from_rows({{0.0, -0.1}, {0.1, 0.0}}).validate(),
                    ValidationError);
    CHECK_THROWS_AS(sectors::GrowthMatrix::from_rows({{0.0, 0.1, 0.2}, {0.1, 0.0, 0.3}}),
                    ValidationError);
}
