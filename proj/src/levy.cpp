#include "granular/levy.hpp"

#include <algorithm>
#include <cmath>

#include "granular/errors.hpp"
#include "granular/parallel.hpp"
#include "granular/stats.hpp"

namespace granular::levy {

namespace {

std::vector<std::int64_t> normalize_lags(std::vector<std::int64_t> lags) {
    if (lags.empty()) throw ValidationError("levy: empty lag list");
    std::sort(lags.begin(), lags.end());
    lags.erase(std::unique(lags.begin(), lags.end()), lags.end());
    if (lags.front() < 1) throw ValidationError("levy: lags must be >= 1");
    return lags;
}

struct LagColumn {
    std::int64_t lag;
    std::vector<double> increments;
};

PeakScaling peak_from_columns(std::vector<LagColumn> columns, const BandwidthRule& rule) {
    PeakScaling result;
    result.bandwidth_rule = rule.name;
    std::size_t degenerate = 0;
    for (auto& column : columns) {
        auto& xs = column.increments;
        if (xs.size() < kMinIncrementsPerLag) {
            result.dropped_lags.push_back(column.lag);
            continue;
        }
        const double sigma = stats::iqr_sigma(xs);
        if (!(sigma > 0)) {
            result.dropped_lags.push_back(column.lag);
            ++degenerate;
            continue;
        }
        for (auto& x : xs) x = std::abs(x);
        std::sort(xs.begin(), xs.end());
        double h = rule.width(sigma, xs.size());
        auto count = static_cast<std::size_t>(
            std::upper_bound(xs.begin(), xs.end(), h) - xs.begin());
        if (count < static_cast<std::size_t>(rule.min_count)) {
            // widen to the min_count-th smallest magnitude
            const std::size_t want =
                std::min<std::size_t>(rule.min_count, xs.size()) - 1;
            h = xs[want];
            if (!(h > 0)) {
                result.dropped_lags.push_back(column.lag);
                ++degenerate;
                continue;
            }
            count = static_cast<std::size_t>(
                std::upper_bound(xs.begin(), xs.end(), h) - xs.begin());
        }
        const double n = static_cast<double>(xs.size());
        result.lags.push_back(column.lag);
        result.p_origin_hat.push_back(static_cast<double>(count) / (n * 2.0 * h));
        result.sigma_hat.push_back(sigma);
        result.stderr_hat.push_back(std::sqrt(static_cast<double>(count)) / (n * 2.0 * h));
        result.counts.push_back(count);
        result.bandwidths.push_back(h);
    }
    if (degenerate == columns.size())
        throw NumericError("central_peak_estimate: all increments degenerate "
                           "(constant series?)");
    if (result.lags.size() < 3)
        throw NumericError("central_peak_estimate: fewer than 3 usable lags "
                           "(need >= 500 increments per lag)");
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < result.lags.size(); ++i) {
        lx.push_back(std::log(static_cast<double>(result.lags[i])));
        ly.push_back(std::log(result.p_origin_hat[i]));
    }
    const auto fit = stats::fit_line(lx, ly);
    result.slope = fit.slope;
    result.slope_ci = 1.96 * fit.slope_se;
    return result;
}

std::vector<LagColumn> columns_from_ensemble(const FlightEnsemble& ensemble,
                                             const std::vector<std::int64_t>& lags) {
    std::vector<LagColumn> columns;
    for (std::int64_t lag : normalize_lags(lags)) {
        const auto view = ensemble.at_time(ensemble.time_index(lag));
        columns.push_back({lag, std::vector<double>(view.begin(), view.end())});
    }
    return columns;
}

std::vector<LagColumn> columns_from_series(std::span<const double> series,
                                           const std::vector<std::int64_t>& lags) {
    const auto sorted = normalize_lags(lags);
    const auto n = static_cast<std::int64_t>(series.size());
    if (sorted.back() > n / 10)
        throw ValidationError("central_peak_estimate: max lag exceeds series length / 10");
    std::vector<LagColumn> columns;
    for (std::int64_t lag : sorted) {
        LagColumn column{lag, {}};
        column.increments.reserve(static_cast<std::size_t>(n - lag));
        for (std::int64_t i = 0; i + lag < n; ++i)
            column.increments.push_back(series[static_cast<std::size_t>(i + lag)] -
                                        series[static_cast<std::size_t>(i)]);
        columns.push_back(std::move(column));
    }
    return columns;
}

WidthScaling width_from_columns(const std::vector<LagColumn>& columns) {
    WidthScaling result;
    for (const auto& column : columns) {
        if (column.increments.size() < kMinIncrementsPerLag) continue;
        const double sigma = stats::iqr_sigma(column.increments);
        if (!(sigma > 0)) continue;
        result.lags.push_back(column.lag);
        result.sigma_hat.push_back(sigma);
    }
    if (result.lags.size() < 3)
        throw NumericError("width_scaling: fewer than 3 usable lags");
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < result.lags.size(); ++i) {
        lx.push_back(std::log(static_cast<double>(result.lags[i])));
        ly.push_back(std::log(result.sigma_hat[i]));
    }
    const auto fit = stats::fit_line(lx, ly);
    result.exponent = fit.slope;
    result.exponent_ci = 1.96 * fit.slope_se;
    return result;
}

} // namespace

StepDistribution StepDistribution::uniform(double bound) {
    StepDistribution d;
    d.kind = StepKind::uniform_bounded;
    d.bound = bound;
    d.validate();
    return d;
}

StepDistribution StepDistribution::pareto(double alpha, double scale) {
    StepDistribution d;
    d.kind = StepKind::pareto_symmetric;
    d.alpha = alpha;
    d.scale = scale;
    d.validate();
    return d;
}

void StepDistribution::validate() const {
    if (kind == StepKind::uniform_bounded) {
        if (!(bound > 0)) throw ValidationError("step distribution: uniform bound must be > 0");
    } else {
        if (!(alpha > 0)) throw ValidationError("step distribution: pareto alpha must be > 0");
        if (!(scale > 0)) throw ValidationError("step distribution: pareto scale must be > 0");
    }
}

std::string StepDistribution::label() const {
    if (kind == StepKind::uniform_bounded) return "uniform(D=" + std::to_string(bound) + ")";
    return "pareto(alpha=" + std::to_string(alpha) + ", scale=" + std::to_string(scale) + ")";
}

double sample_step(const StepDistribution& dist, RngStream& rng) {
    if (dist.kind == StepKind::uniform_bounded)
        return dist.bound * (2.0 * rng.uniform01() - 1.0);
    const double sign = (rng.next_u32() & 1u) ? 1.0 : -1.0;
    const double magnitude = dist.scale * std::pow(rng.uniform_open01(), -1.0 / dist.alpha);
    return sign * magnitude;
}

std::size_t FlightEnsemble::time_index(std::int64_t t) const {
    const auto it = std::lower_bound(times.begin(), times.end(), t);
    if (it == times.end() || *it != t)
        throw ValidationError("flight ensemble: time " + std::to_string(t) +
                              " was not recorded");
    return static_cast<std::size_t>(it - times.begin());
}

FlightEnsemble simulate_flight(const StepDistribution& dist, std::int64_t steps,
                               std::size_t paths, std::uint64_t seed, int threads) {
    if (steps < 1) throw ValidationError("simulate_flight: steps must be >= 1");
    std::vector<std::int64_t> times(static_cast<std::size_t>(steps));
    for (std::int64_t t = 1; t <= steps; ++t) times[static_cast<std::size_t>(t - 1)] = t;
    return simulate_flight_at(dist, std::move(times), paths, seed, threads);
}

FlightEnsemble simulate_flight_at(const StepDistribution& dist,
                                  std::vector<std::int64_t> record_times,
                                  std::size_t paths, std::uint64_t seed, int threads) {
    dist.validate();
    if (paths < 1) throw ValidationError("simulate_flight: paths must be >= 1");
    record_times = normalize_lags(std::move(record_times));
    if (record_times.size() * paths > (std::size_t{1} << 31))
        throw ValidationError("simulate_flight: ensemble too large; record fewer times");

    FlightEnsemble ensemble;
    ensemble.dist = dist;
    ensemble.seed = seed;
    ensemble.times = std::move(record_times);
    ensemble.paths = paths;
    ensemble.values.resize(ensemble.times.size() * paths);
    ensemble.max_abs_step.resize(paths);

    const auto& times = ensemble.times;
    const std::int64_t last = times.back();
    parallel_chunks(paths, threads, [&](std::size_t begin, std::size_t end, int) {
        for (std::size_t p = begin; p < end; ++p) {
            RngStream rng(seed, static_cast<std::uint32_t>(p), 0, stream_tag::kLevyPath);
            double x = 0, max_step = 0;
            std::size_t next = 0;
            for (std::int64_t t = 1; t <= last; ++t) {
                const double s = sample_step(dist, rng);
                x += s;
                max_step = std::max(max_step, std::abs(s));
                if (t == times[next]) {
                    ensemble.values[next * paths + p] = x;
                    ++next;
                }
            }
            ensemble.max_abs_step[p] = max_step;
        }
    });
    return ensemble;
}

double BandwidthRule::width(double robust_sigma, std::size_t n) const {
    return constant * robust_sigma * std::pow(static_cast<double>(n), -0.2);
}

PeakScaling central_peak_estimate(const FlightEnsemble& ensemble,
                                  const std::vector<std::int64_t>& lags,
                                  const BandwidthRule& rule) {
    return peak_from_columns(columns_from_ensemble(ensemble, lags), rule);
}

PeakScaling central_peak_estimate(std::span<const double> series,
                                  const std::vector<std::int64_t>& lags,
                                  const BandwidthRule& rule) {
    return peak_from_columns(columns_from_series(series, lags), rule);
}

WidthScaling width_scaling(const FlightEnsemble& ensemble,
                           const std::vector<std::int64_t>& lags) {
    return width_from_columns(columns_from_ensemble(ensemble, lags));
}

WidthScaling width_scaling(std::span<const double> series,
                           const std::vector<std::int64_t>& lags) {
    return width_from_columns(columns_from_series(series, lags));
}

Regime classify_regime(double alpha) {
    if (!(alpha > 0)) throw ValidationError("classify_regime: alpha must be > 0");
    if (alpha > 2) return Regime::gaussian;
    if (alpha > 1) return Regime::fractal;
    return Regime::intermittent;
}

std::string_view regime_name(Regime regime) {
    switch (regime) {
    case Regime::gaussian: return "gaussian";
    case Regime::fractal: return "fractal";
    case Regime::intermittent: return "intermittent";
    }
    return "unknown";
}

} // namespace granular::levy
