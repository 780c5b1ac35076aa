#pragma once

#include <cstdint>
#include <vector>

namespace granular::walk {

// Probability that a simple random walker on the hypercubic lattice ever
// returns to its start. Exactly 1 below three dimensions; the d = 3 value
// is the classic constant for the simple cubic lattice.
inline constexpr double kReturnProbability1d = 1.0;
inline constexpr double kReturnProbability2d = 1.0;
inline constexpr double kReturnProbability3d = 0.340437;

struct WalkEnsembleSpec {
    int dimension = 1;      // 1, 2 or 3
    std::int64_t steps = 1; // available time steps
    std::int64_t walkers = 1;
    std::uint64_t seed = 1;

    void validate() const;
};

struct ReturnStatistics {
    std::vector<std::int64_t> lags; // even lags 2t; odd-lag probability is identically 0
    std::vector<double> p_origin;
    std::vector<double> standard_errors;
    std::vector<std::int64_t> hits; // raw at-origin counts behind each estimate
    std::int64_t walkers = 0;
};

enum class PolyaMode { analytic, monte_carlo };

struct PolyaEstimate {
    double value = 0;
    std::int64_t truncation_horizon = 0;
    double tail_correction = 0;
    double confidence_halfwidth = 0;
};

// Exact return probability at a small even lag by exhaustive enumeration of
// all (2d)^lag equal-probability nearest-neighbor paths. Serves as the
// oracle for the Monte Carlo estimates. lag <= 24 in 1d, <= 12 in 2d.
double return_probability_exact(int dimension, int lag);

// Asymptotic closed form (t*pi)^(-d/2) at lag = 2t for d in {1, 2}.
double theoretical_p_origin(int dimension, std::int64_t lag);

// Monte Carlo at-origin probability at each requested even lag.
// Deterministic per seed; identical results for any thread count.
ReturnStatistics simulate_return_statistics(const WalkEnsembleSpec& spec,
                                            std::vector<std::int64_t> lags,
                                            int threads = 0);

// Fraction of walkers that return at least once within the horizon, plus a
// tail correction in d = 3 (first-return mass beyond the horizon,
// extrapolated from the measured t^(-3/2) tail over the last decade).
// Analytic mode reports exactly 1 for d <= 2 and is unavailable for d = 3.
PolyaEstimate estimate_polya_constant(int dimension, std::int64_t horizon,
                                      std::int64_t walkers, std::uint64_t seed,
                                      PolyaMode mode = PolyaMode::monte_carlo,
                                      int threads = 0);

struct SlopeEstimate {
    double slope = 0;
    double halfwidth = 0; // 95% half-width from the OLS slope standard error
    int lags_used = 0;
};

// OLS slope of log p vs log lag over [lag_min, lag_max], excluding lags
// whose estimates rest on fewer than min_hits at-origin counts.
SlopeEstimate fit_return_slope(const ReturnStatistics& stats, std::int64_t lag_min,
                               std::int64_t lag_max, std::int64_t min_hits = 100);

// Lag helpers shared with the CLI: even geometric ladder a, a*factor, ... <= b.
std::vector<std::int64_t> geometric_lags(std::int64_t first, std::int64_t last,
                                         double factor = 2.0);

} // namespace granular::walk
