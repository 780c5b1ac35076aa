#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "granular/levy.hpp"
#include "granular/sectors.hpp"

namespace granular::fitkit {

struct FitRange {
    int min_rank = 0; // 0 selects the default: skip ranks 1-2
    int max_rank = 0; // 0 selects the default: skip the bottom decile
};

struct RankFit {
    std::vector<double> sorted_sizes; // descending
    double alpha_hat = 0;
    double ci_halfwidth = 0;
    int min_rank = 0;
    int max_rank = 0;
    double slope = 0; // log size vs log rank, = -1/alpha
    double slope_se = 0;
};

// Rank-size exponent: OLS slope m of log(size) vs log(rank) over the fit
// range, alpha = -1/m, delta-method CI. The convention is
// size(rank N) ~ N^(-1/alpha), matching the tail exponent alpha of the
// size distribution.
RankFit rank_size_fit(std::vector<double> sizes, FitRange range = {});

struct BetaEstimate {
    double beta_hat = 0;
    double ci_halfwidth = 0;
    levy::PeakScaling peak;
};

// Fluctuation exponent beta from a positive level series: log-returns are
// formed internally, the central peak of the lag-t increments is estimated
// on overlapping windows, and beta = -1/slope.
BetaEstimate beta_from_series(std::span<const double> levels,
                              const std::vector<std::int64_t>& lags,
                              const levy::BandwidthRule& rule = {});

struct AlphaBetaReport {
    double alpha_hat = 0;
    double alpha_ci = 0;
    double beta_hat = 0;
    double beta_ci = 0;
    double tolerance = 0;
    bool consistent = false;
};

AlphaBetaReport alpha_beta_test(const RankFit& rank, const BetaEstimate& beta,
                                double tolerance);

struct EpisodeFit {
    double t_start = 0;
    double t_end = 0;
    double lambda_old = 0; // decay rate of the fading component
    double lambda_new = 0; // growth rate of the rising component
    double c_old = 0;
    double c_new = 0;
    double rmse = 0;
    bool single_exponential = false; // degenerate two-exponential fit
};

// Nonlinear least squares of c_old*exp(lambda_old*(t-t0)) +
// c_new*exp(lambda_new*(t-t0)) on a window of a positive series. Rates are
// initialized from the log-slopes of the first and last window quartiles
// (the crossing structure makes the endpoints rate-pure); residuals are
// relative, matching multiplicative noise.
EpisodeFit fit_crossing_episode(std::span<const double> values,
                                std::span<const double> times, double t_start,
                                double t_end);

struct Episode {
    double t_start = 0;
    double t_end = 0;
    std::optional<EpisodeFit> fit;
    std::string error; // per-episode failures do not abort the others
};

// Split a series at its cusp maxima and fit a crossing-exponential episode
// between consecutive boundaries.
std::vector<Episode> segment_episodes(std::span<const double> values,
                                      std::span<const double> times,
                                      const sectors::CuspOptions& options = {});

} // namespace granular::fitkit
