#include "granular/walk.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "granular/errors.hpp"
#include "granular/parallel.hpp"
#include "granular/rng.hpp"
#include "granular/stats.hpp"

namespace granular::walk {

namespace {

void require_even_lag(std::int64_t lag) {
    if (lag < 2 || lag % 2 != 0)
        throw ValidationError("lags must be positive even integers; the at-origin "
                              "probability at odd lags is identically zero");
}

// Depth-first enumeration over all 2^lag one-dimensional paths, pruned when
// the walker can no longer reach the origin in the remaining steps.
std::uint64_t count_returns_1d(int remaining, int pos) {
    if (std::abs(pos) > remaining) return 0;
    if (remaining == 0) return pos == 0 ? 1u : 0u;
    return count_returns_1d(remaining - 1, pos - 1) +
           count_returns_1d(remaining - 1, pos + 1);
}

std::uint64_t count_returns_2d(int remaining, int x, int y) {
    if (std::abs(x) + std::abs(y) > remaining) return 0;
    if (remaining == 0) return (x == 0 && y == 0) ? 1u : 0u;
    return count_returns_2d(remaining - 1, x - 1, y) +
           count_returns_2d(remaining - 1, x + 1, y) +
           count_returns_2d(remaining - 1, x, y - 1) +
           count_returns_2d(remaining - 1, x, y + 1);
}

template <int Dim>
struct Position {
    int c[Dim] = {};
    void move(std::uint8_t dir) {
        c[dir >> 1] += (dir & 1) ? 1 : -1;
    }
    bool at_origin() const {
        for (int i = 0; i < Dim; ++i)
            if (c[i] != 0) return false;
        return true;
    }
};

// Direction batch sizes keeping (2d)^count within 64 bits.
template <int Dim> struct Batch;
template <> struct Batch<1> { static constexpr int kCount = 32; };
template <> struct Batch<2> { static constexpr int kCount = 16; };
template <> struct Batch<3> { static constexpr int kCount = 20; };

template <int Dim>
void accumulate_hits(const WalkEnsembleSpec& spec, const std::vector<std::int64_t>& lags,
                     std::int64_t begin, std::int64_t end, std::vector<std::int64_t>& hits) {
    const std::int64_t max_lag = lags.back();
    constexpr int kBatch = Batch<Dim>::kCount;
    std::uint8_t dirs[kBatch];
    for (std::int64_t w = begin; w < end; ++w) {
        RngStream rng(spec.seed, static_cast<std::uint32_t>(w), 0, stream_tag::kWalkReturn);
        Position<Dim> pos;
        std::size_t next = 0;
        int used = kBatch;
        for (std::int64_t t = 1; t <= max_lag; ++t) {
            if (used == kBatch) {
                rng.fill_directions<2 * Dim, kBatch>(dirs);
                used = 0;
            }
            pos.move(dirs[used++]);
            if (t == lags[next]) {
                if (pos.at_origin()) ++hits[next];
                if (++next == lags.size()) break;
            }
        }
    }
}

template <int Dim>
struct PolyaChunk {
    std::int64_t returned = 0;
    std::vector<std::int64_t> first_return; // indexed by t/2
};

template <int Dim>
void polya_walkers(std::uint64_t seed, std::int64_t horizon, std::int64_t begin,
                   std::int64_t end, PolyaChunk<Dim>& chunk) {
    constexpr int kBatch = Batch<Dim>::kCount;
    std::uint8_t dirs[kBatch];
    for (std::int64_t w = begin; w < end; ++w) {
        RngStream rng(seed, static_cast<std::uint32_t>(w), 0, stream_tag::kWalkPolya);
        Position<Dim> pos;
        int used = kBatch;
        for (std::int64_t t = 1; t <= horizon; ++t) {
            if (used == kBatch) {
                rng.fill_directions<2 * Dim, kBatch>(dirs);
                used = 0;
            }
            pos.move(dirs[used++]);
            if (pos.at_origin()) {
                ++chunk.returned;
                ++chunk.first_return[static_cast<std::size_t>(t / 2)];
                break;
            }
        }
    }
}

} // namespace

void WalkEnsembleSpec::validate() const {
    if (dimension < 1 || dimension > 3)
        throw ValidationError("walk: dimension must be 1, 2 or 3");
    if (steps < 1) throw ValidationError("walk: steps must be >= 1");
    if (walkers < 1) throw ValidationError("walk: walkers must be >= 1");
}

double return_probability_exact(int dimension, int lag) {
    require_even_lag(lag);
    if (dimension == 1) {
        if (lag > 24)
            throw ValidationError("return_probability_exact: 1d enumeration bound is lag <= 24");
        const std::uint64_t count = count_returns_1d(lag, 0);
        return static_cast<double>(count) / std::pow(2.0, lag);
    }
    if (dimension == 2) {
        if (lag > 12)
            throw ValidationError("return_probability_exact: 2d enumeration bound is lag <= 12");
        const std::uint64_t count = count_returns_2d(lag, 0, 0);
        return static_cast<double>(count) / std::pow(4.0, lag);
    }
    throw ValidationError("return_probability_exact: dimension must be 1 or 2");
}

double theoretical_p_origin(int dimension, std::int64_t lag) {
    if (dimension != 1 && dimension != 2)
        throw ValidationError("theoretical_p_origin: dimension must be 1 or 2");
    require_even_lag(lag);
    const double t = static_cast<double>(lag) / 2.0;
    return std::pow(t * std::numbers::pi, -0.5 * dimension);
}

ReturnStatistics simulate_return_statistics(const WalkEnsembleSpec& spec,
                                            std::vector<std::int64_t> lags, int threads) {
    spec.validate();
    if (lags.empty()) throw ValidationError("simulate_return_statistics: empty lag list");
    std::sort(lags.begin(), lags.end());
    lags.erase(std::unique(lags.begin(), lags.end()), lags.end());
    for (std::int64_t lag : lags) require_even_lag(lag);
    if (lags.back() > spec.steps)
        throw ValidationError("simulate_return_statistics: max lag exceeds available steps");

    const auto n = static_cast<std::size_t>(spec.walkers);
    const int workers = threads > 0 ? threads : default_thread_count();
    std::vector<std::vector<std::int64_t>> chunk_hits(
        static_cast<std::size_t>(std::max(1, workers)),
        std::vector<std::int64_t>(lags.size(), 0));

    parallel_chunks(n, workers, [&](std::size_t begin, std::size_t end, int chunk) {
        auto& hits = chunk_hits[static_cast<std::size_t>(chunk)];
        switch (spec.dimension) {
        case 1: accumulate_hits<1>(spec, lags, begin, end, hits); break;
        case 2: accumulate_hits<2>(spec, lags, begin, end, hits); break;
        default: accumulate_hits<3>(spec, lags, begin, end, hits); break;
        }
    });

    ReturnStatistics stats;
    stats.lags = lags;
    stats.walkers = spec.walkers;
    stats.hits.assign(lags.size(), 0);
    for (const auto& hits : chunk_hits)
        for (std::size_t i = 0; i < lags.size(); ++i) stats.hits[i] += hits[i];
    stats.p_origin.resize(lags.size());
    stats.standard_errors.resize(lags.size());
    const double w = static_cast<double>(spec.walkers);
    for (std::size_t i = 0; i < lags.size(); ++i) {
        const double p = static_cast<double>(stats.hits[i]) / w;
        stats.p_origin[i] = p;
        stats.standard_errors[i] = std::sqrt(p * (1.0 - p) / w);
    }
    return stats;
}

PolyaEstimate estimate_polya_constant(int dimension, std::int64_t horizon,
                                      std::int64_t walkers, std::uint64_t seed,
                                      PolyaMode mode, int threads) {
    if (dimension < 1 || dimension > 3)
        throw ValidationError("estimate_polya_constant: dimension must be 1, 2 or 3");
    if (mode == PolyaMode::analytic) {
        if (dimension <= 2) return PolyaEstimate{1.0, 0, 0.0, 0.0};
        throw ValidationError("estimate_polya_constant: no analytic route for d = 3; "
                              "use monte_carlo");
    }
    if (horizon < 100) throw ValidationError("estimate_polya_constant: horizon must be >= 100");
    if (walkers < 1000) throw ValidationError("estimate_polya_constant: walkers must be >= 1000");

    const int workers = threads > 0 ? threads : default_thread_count();
    const auto hist_size = static_cast<std::size_t>(horizon / 2 + 1);

    std::vector<std::int64_t> returned_per_chunk(static_cast<std::size_t>(std::max(1, workers)), 0);
    std::vector<std::vector<std::int64_t>> hist_per_chunk(
        returned_per_chunk.size(), std::vector<std::int64_t>(hist_size, 0));

    parallel_chunks(static_cast<std::size_t>(walkers), workers,
                    [&](std::size_t begin, std::size_t end, int chunk) {
                        if (dimension == 1) {
                            PolyaChunk<1> c{0, std::move(hist_per_chunk[chunk])};
                            polya_walkers<1>(seed, horizon, begin, end, c);
                            returned_per_chunk[chunk] = c.returned;
                            hist_per_chunk[chunk] = std::move(c.first_return);
                        } else if (dimension == 2) {
                            PolyaChunk<2> c{0, std::move(hist_per_chunk[chunk])};
                            polya_walkers<2>(seed, horizon, begin, end, c);
                            returned_per_chunk[chunk] = c.returned;
                            hist_per_chunk[chunk] = std::move(c.first_return);
                        } else {
                            PolyaChunk<3> c{0, std::move(hist_per_chunk[chunk])};
                            polya_walkers<3>(seed, horizon, begin, end, c);
                            returned_per_chunk[chunk] = c.returned;
                            hist_per_chunk[chunk] = std::move(c.first_return);
                        }
                    });

    std::int64_t returned = 0;
    for (auto r : returned_per_chunk) returned += r;

    const double w = static_cast<double>(walkers);
    const double raw = static_cast<double>(returned) / w;

    PolyaEstimate est;
    est.truncation_horizon = horizon;
    est.confidence_halfwidth = 1.96 * std::sqrt(raw * (1.0 - raw) / w);
    est.tail_correction = 0.0;
    if (dimension == 3) {
        // First-return mass q(2m) ~ c * m^(-3/2). Fit c on the last decade
        // of the measured histogram, then integrate the shape beyond the
        // horizon. Raw truncation biases the estimate low by a few permil
        // at feasible horizons.
        std::vector<std::int64_t> hist(hist_size, 0);
        for (const auto& h : hist_per_chunk)
            for (std::size_t i = 0; i < hist_size; ++i) hist[i] += h[i];
        const std::int64_t m_hi = horizon / 2;
        const std::int64_t m_lo = std::max<std::int64_t>(1, m_hi / 10);
        double mass = 0, shape = 0;
        for (std::int64_t m = m_lo; m <= m_hi; ++m) {
            mass += static_cast<double>(hist[static_cast<std::size_t>(m)]);
            shape += std::pow(static_cast<double>(m), -1.5);
        }
        if (mass > 0 && shape > 0) {
            const double c = (mass / w) / shape;
            // Midpoint rule for sum_{m > m_hi} m^(-3/2).
            const double tail_shape = 2.0 / std::sqrt(static_cast<double>(m_hi) + 0.5);
            est.tail_correction = c * tail_shape;
        }
    }
    est.value = std::min(1.0, raw + est.tail_correction);
    return est;
}

SlopeEstimate fit_return_slope(const ReturnStatistics& stats, std::int64_t lag_min,
                               std::int64_t lag_max, std::int64_t min_hits) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < stats.lags.size(); ++i) {
        if (stats.lags[i] < lag_min || stats.lags[i] > lag_max) continue;
        if (stats.hits[i] < min_hits || stats.p_origin[i] <= 0) continue;
        lx.push_back(std::log(static_cast<double>(stats.lags[i])));
        ly.push_back(std::log(stats.p_origin[i]));
    }
    if (lx.size() < 3)
        throw NumericError("fit_return_slope: fewer than 3 usable lags in window");
    const auto fit = stats::fit_line(lx, ly);
    return SlopeEstimate{fit.slope, 1.96 * fit.slope_se, fit.n};
}

std::vector<std::int64_t> geometric_lags(std::int64_t first, std::int64_t last, double factor) {
    if (first < 2 || last < first || factor <= 1.0)
        throw ValidationError("geometric_lags: need 2 <= first <= last and factor > 1");
    std::vector<std::int64_t> lags;
    double v = static_cast<double>(first);
    while (v <= static_cast<double>(last) + 0.5) {
        auto lag = static_cast<std::int64_t>(std::llround(v));
        lag += lag % 2; // keep lags even
        if (lags.empty() || lag != lags.back()) lags.push_back(lag);
        v *= factor;
    }
    while (!lags.empty() && lags.back() > last) lags.pop_back();
    if (lags.empty()) throw ValidationError("geometric_lags: empty ladder");
    return lags;
}

} // namespace granular::walk
