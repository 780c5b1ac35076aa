#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "granular/rng.hpp"

namespace granular::levy {

enum class StepKind { uniform_bounded, pareto_symmetric };

struct StepDistribution {
    StepKind kind = StepKind::uniform_bounded;
    double alpha = 0; // Pareto tail exponent
    double scale = 1; // Pareto minimum magnitude
    double bound = 1; // uniform half-width D

    static StepDistribution uniform(double bound);
    static StepDistribution pareto(double alpha, double scale = 1.0);
    void validate() const;
    std::string label() const;
};

// One step. Uniform: flat on [-D, D]. Pareto: random sign, magnitude
// scale * U^(-1/alpha) with U in (0, 1] — the inverse CDF of the one-sided
// Pareto tail, symmetrized so the walk is driftless.
double sample_step(const StepDistribution& dist, RngStream& rng);

// Ensemble of independent walks, each the cumulative sum of i.i.d. steps.
// Positions are stored only at the recorded times (times-major layout);
// recording every step of a large ensemble would not fit in memory.
struct FlightEnsemble {
    StepDistribution dist;
    std::uint64_t seed = 0;
    std::vector<std::int64_t> times; // ascending, >= 1
    std::size_t paths = 0;
    std::vector<double> values;       // values[time_index * paths + path]
    std::vector<double> max_abs_step; // per path, over [1, times.back()]

    std::span<const double> at_time(std::size_t time_index) const {
        return {values.data() + time_index * paths, paths};
    }
    std::size_t time_index(std::int64_t t) const; // throws if t not recorded
};

FlightEnsemble simulate_flight(const StepDistribution& dist, std::int64_t steps,
                               std::size_t paths, std::uint64_t seed, int threads = 0);
FlightEnsemble simulate_flight_at(const StepDistribution& dist,
                                  std::vector<std::int64_t> record_times,
                                  std::size_t paths, std::uint64_t seed,
                                  int threads = 0);

// Bandwidth for the density-at-zero estimate: h = c * sigma_robust * n^(-1/5),
// floored so at least min_count increments land inside [-h, h]. This is the
// one estimator choice everything downstream leans on, so it is named and
// swappable.
struct BandwidthRule {
    std::string name = "silverman";
    double constant = 1.06;
    int min_count = 50;

    double width(double robust_sigma, std::size_t n) const;
};

struct PeakScaling {
    std::vector<std::int64_t> lags;
    std::vector<double> p_origin_hat;
    std::vector<double> sigma_hat;
    std::vector<double> stderr_hat;
    std::vector<std::size_t> counts; // increments per lag
    std::vector<double> bandwidths;
    double slope = 0;    // d log p / d log t
    double slope_ci = 0; // 95% half-width
    std::vector<std::int64_t> dropped_lags;
    std::string bandwidth_rule;
};

inline constexpr std::size_t kMinIncrementsPerLag = 500;

// Central peak P_origin(t): fraction of lag-t increments within [-h, h]
// divided by 2h, with a log-log slope fit across lags. Ensemble mode uses
// the independent per-path positions; series mode uses all overlapping
// increments of one long series (max lag <= length / 10).
PeakScaling central_peak_estimate(const FlightEnsemble& ensemble,
                                  const std::vector<std::int64_t>& lags,
                                  const BandwidthRule& rule = {});
PeakScaling central_peak_estimate(std::span<const double> series,
                                  const std::vector<std::int64_t>& lags,
                                  const BandwidthRule& rule = {});

struct WidthScaling {
    std::vector<std::int64_t> lags;
    std::vector<double> sigma_hat; // IQR / 1.349 per lag
    double exponent = 0;
    double exponent_ci = 0;
};

WidthScaling width_scaling(const FlightEnsemble& ensemble,
                           const std::vector<std::int64_t>& lags);
WidthScaling width_scaling(std::span<const double> series,
                           const std::vector<std::int64_t>& lags);

enum class Regime { gaussian, fractal, intermittent };

// alpha > 2: Gaussian; 1 < alpha <= 2: fractal (Levy stable);
// alpha <= 1: intermittent, dominated by the largest single steps.
Regime classify_regime(double alpha);
std::string_view regime_name(Regime regime);

} // namespace granular::levy
