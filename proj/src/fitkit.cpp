#include "granular/fitkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "granular/errors.hpp"
#include "granular/stats.hpp"

namespace granular::fitkit {

namespace {

// Relative residuals of the two-exponential model on a window.
struct EpisodeModel {
    std::span<const double> tau; // times relative to window start
    std::span<const double> y;

    double rss(double l_old, double l_new, double c_old, double c_new) const {
        double s = 0;
        for (std::size_t i = 0; i < tau.size(); ++i) {
            const double m = c_old * std::exp(l_old * tau[i]) + c_new * std::exp(l_new * tau[i]);
            const double r = (m - y[i]) / y[i];
            s += r * r;
        }
        return s;
    }

    // Amplitudes by weighted linear least squares given the rates.
    bool amplitudes(double l_old, double l_new, double& c_old, double& c_new) const {
        double a00 = 0, a01 = 0, a11 = 0, b0 = 0, b1 = 0;
        for (std::size_t i = 0; i < tau.size(); ++i) {
            const double wgt = 1.0 / (y[i] * y[i]);
            const double e0 = std::exp(l_old * tau[i]);
            const double e1 = std::exp(l_new * tau[i]);
            a00 += wgt * e0 * e0;
            a01 += wgt * e0 * e1;
            a11 += wgt * e1 * e1;
            b0 += wgt * e0 * y[i];
            b1 += wgt * e1 * y[i];
        }
        const double det = a00 * a11 - a01 * a01;
        if (!(std::abs(det) > 1e-300)) return false;
        c_old = (b0 * a11 - b1 * a01) / det;
        c_new = (b1 * a00 - b0 * a01) / det;
        return std::isfinite(c_old) && std::isfinite(c_new);
    }
};

double log_slope(std::span<const double> t, std::span<const double> y, std::size_t begin,
                 std::size_t end) {
    std::vector<double> xs, ys;
    for (std::size_t i = begin; i < end; ++i) {
        xs.push_back(t[i]);
        ys.push_back(std::log(y[i]));
    }
    if (xs.size() < 2) return 0.0;
    return stats::fit_line(xs, ys).slope;
}

} // namespace

RankFit rank_size_fit(std::vector<double> sizes, FitRange range) {
    if (sizes.size() < 20) throw ValidationError("rank_size_fit: need at least 20 sizes");
    for (double s : sizes)
        if (!(s > 0)) throw ValidationError("rank_size_fit: sizes must be > 0");
    std::sort(sizes.begin(), sizes.end(), std::greater<>());

    const int n = static_cast<int>(sizes.size());
    int lo = range.min_rank > 0 ? range.min_rank : 3;          // skip extreme-value ranks 1-2
    int hi = range.max_rank > 0 ? range.max_rank : n - n / 10; // skip the truncated bottom decile
    lo = std::clamp(lo, 1, n);
    hi = std::clamp(hi, 1, n);
    if (hi - lo + 1 < 10)
        throw ValidationError("rank_size_fit: fit range must span at least 10 ranks");

    std::vector<double> lx, ly;
    for (int r = lo; r <= hi; ++r) {
        lx.push_back(std::log(static_cast<double>(r)));
        ly.push_back(std::log(sizes[static_cast<std::size_t>(r - 1)]));
    }
    const auto fit = stats::fit_line(lx, ly);
    if (!(fit.slope < -1e-9))
        throw NumericError("rank_size_fit: degenerate rank profile, alpha unbounded");

    RankFit result;
    result.sorted_sizes = std::move(sizes);
    result.slope = fit.slope;
    result.slope_se = fit.slope_se;
    result.alpha_hat = -1.0 / fit.slope;
    result.ci_halfwidth = 1.96 * fit.slope_se / (fit.slope * fit.slope);
    result.min_rank = lo;
    result.max_rank = hi;
    return result;
}

BetaEstimate beta_from_series(std::span<const double> levels,
                              const std::vector<std::int64_t>& lags,
                              const levy::BandwidthRule& rule) {
    if (levels.size() < 100) throw ValidationError("beta_from_series: series too short");
    for (double v : levels)
        if (!(v > 0)) throw ValidationError("beta_from_series: levels must be > 0");
    if (lags.empty()) throw ValidationError("beta_from_series: empty lag list");

    std::vector<std::int64_t> sorted = lags;
    std::sort(sorted.begin(), sorted.end());
    std::int64_t max_gap = sorted.front();
    for (std::size_t i = 1; i < sorted.size(); ++i)
        max_gap = std::max(max_gap, sorted[i] - sorted[i - 1]);
    if (static_cast<std::int64_t>(levels.size()) < 100 * max_gap)
        throw ValidationError("beta_from_series: series length must be >= 100x the "
                              "largest lag spacing");

    std::vector<double> log_levels(levels.size());
    for (std::size_t i = 0; i < levels.size(); ++i) log_levels[i] = std::log(levels[i]);

    BetaEstimate estimate;
    estimate.peak = levy::central_peak_estimate(log_levels, sorted, rule);
    if (!(estimate.peak.slope < 0))
        throw NumericError("beta_from_series: nonnegative central-peak slope; "
                           "no power-law decay to invert");
    estimate.beta_hat = -1.0 / estimate.peak.slope;
    estimate.ci_halfwidth = estimate.peak.slope_ci / (estimate.peak.slope * estimate.peak.slope);
    return estimate;
}

AlphaBetaReport alpha_beta_test(const RankFit& rank, const BetaEstimate& beta,
                                double tolerance) {
    if (!(tolerance >= 0)) throw ValidationError("alpha_beta_test: tolerance must be >= 0");
    if (!std::isfinite(rank.alpha_hat) || !std::isfinite(beta.beta_hat))
        throw ValidationError("alpha_beta_test: estimates must be finite");
    AlphaBetaReport report;
    report.alpha_hat = rank.alpha_hat;
    report.alpha_ci = rank.ci_halfwidth;
    report.beta_hat = beta.beta_hat;
    report.beta_ci = beta.ci_halfwidth;
    report.tolerance = tolerance;
    report.consistent = std::abs(rank.alpha_hat - beta.beta_hat) <= tolerance;
    return report;
}

EpisodeFit fit_crossing_episode(std::span<const double> values,
                                std::span<const double> times, double t_start,
                                double t_end) {
    if (values.size() != times.size())
        throw ValidationError("fit_crossing_episode: times/values size mismatch");
    std::vector<double> tau, y;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] < t_start - 1e-12 || times[i] > t_end + 1e-12) continue;
        if (!(values[i] > 0))
            throw ValidationError("fit_crossing_episode: series must be > 0 on the window");
        tau.push_back(times[i] - t_start);
        y.push_back(values[i]);
    }
    const std::size_t m = tau.size();
    if (m < 8) throw ValidationError("fit_crossing_episode: need at least 8 samples in window");

    const EpisodeModel model{tau, y};
    const std::size_t quartile = std::max<std::size_t>(2, m / 4);
    const double slope_head = log_slope(tau, y, 0, quartile);
    const double slope_tail = log_slope(tau, y, m - quartile, m);

    double best_rss = std::numeric_limits<double>::infinity();
    double best[4] = {slope_head, slope_tail, 0, 0};
    bool converged = false;

    for (int attempt = 0; attempt < 6 && !converged; ++attempt) {
        // Deterministic restart ladder around the quartile-slope initializer.
        const double spread = 0.25 * attempt;
        double p[4]; // l_old, l_new, c_old, c_new
        p[0] = slope_head * (1.0 + spread) - 0.05 * attempt;
        p[1] = slope_tail * (1.0 + spread) + 0.05 * attempt;
        if (attempt % 2 == 1) std::swap(p[0], p[1]);
        if (!model.amplitudes(p[0], p[1], p[2], p[3])) continue;

        // Full four-parameter Levenberg-Marquardt on the relative residuals.
        double lambda = 1e-3;
        double rss = model.rss(p[0], p[1], p[2], p[3]);
        for (int iter = 0; iter < 120; ++iter) {
            double h[4][4] = {};
            double g[4] = {};
            for (std::size_t i = 0; i < m; ++i) {
                const double e0 = std::exp(p[0] * tau[i]);
                const double e1 = std::exp(p[1] * tau[i]);
                const double mi = p[2] * e0 + p[3] * e1;
                const double r = (mi - y[i]) / y[i];
                const double j[4] = {p[2] * tau[i] * e0 / y[i], p[3] * tau[i] * e1 / y[i],
                                     e0 / y[i], e1 / y[i]};
                for (int a = 0; a < 4; ++a) {
                    g[a] += r * j[a];
                    for (int b = 0; b < 4; ++b) h[a][b] += j[a] * j[b];
                }
            }
            // damped normal equations, solved by elimination with pivoting
            double a[4][5];
            for (int row = 0; row < 4; ++row) {
                for (int col = 0; col < 4; ++col) a[row][col] = h[row][col];
                a[row][row] *= 1.0 + lambda;
                a[row][4] = -g[row];
            }
            bool singular = false;
            for (int col = 0; col < 4 && !singular; ++col) {
                int pivot = col;
                for (int row = col + 1; row < 4; ++row)
                    if (std::abs(a[row][col]) > std::abs(a[pivot][col])) pivot = row;
                if (std::abs(a[pivot][col]) < 1e-300) {
                    singular = true;
                    break;
                }
                if (pivot != col)
                    for (int k = 0; k < 5; ++k) std::swap(a[pivot][k], a[col][k]);
                for (int row = col + 1; row < 4; ++row) {
                    const double f = a[row][col] / a[col][col];
                    for (int k = col; k < 5; ++k) a[row][k] -= f * a[col][k];
                }
            }
            if (singular) {
                lambda *= 10;
                if (lambda > 1e12) break;
                continue;
            }
            double d[4];
            for (int row = 3; row >= 0; --row) {
                double acc = a[row][4];
                for (int col = row + 1; col < 4; ++col) acc -= a[row][col] * d[col];
                d[row] = acc / a[row][row];
            }
            double trial[4];
            for (int k = 0; k < 4; ++k) trial[k] = p[k] + d[k];
            const double trial_rss = model.rss(trial[0], trial[1], trial[2], trial[3]);
            if (std::isfinite(trial_rss) && trial_rss <= rss) {
                const double improvement = rss - trial_rss;
                const double step = std::abs(d[0]) + std::abs(d[1]);
                for (int k = 0; k < 4; ++k) p[k] = trial[k];
                rss = trial_rss;
                lambda = std::max(lambda * 0.3, 1e-14);
                const double rate_scale = 1.0 + std::abs(p[0]) + std::abs(p[1]);
                if (improvement <= 1e-15 * (1.0 + rss) && step < 1e-10 * rate_scale) {
                    converged = true;
                    break;
                }
            } else {
                lambda *= 10;
                if (lambda > 1e12) break;
            }
        }
        if (rss < best_rss) {
            best_rss = rss;
            for (int k = 0; k < 4; ++k) best[k] = p[k];
            if (converged || rss < 1e-20) converged = true;
        }
    }
    if (!std::isfinite(best_rss))
        throw NumericError("fit_crossing_episode: no convergence; best residual infinite");

    EpisodeFit fit;
    fit.t_start = t_start;
    fit.t_end = t_end;
    fit.lambda_old = best[0];
    fit.lambda_new = best[1];
    fit.c_old = best[2];
    fit.c_new = best[3];
    // Report by role: old = the decaying/slower rate.
    if (fit.lambda_old > fit.lambda_new) {
        std::swap(fit.lambda_old, fit.lambda_new);
        std::swap(fit.c_old, fit.c_new);
    }
    double rss_abs = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const double mi = fit.c_old * std::exp(fit.lambda_old * tau[i]) +
                          fit.c_new * std::exp(fit.lambda_new * tau[i]);
        rss_abs += (mi - y[i]) * (mi - y[i]);
    }
    fit.rmse = std::sqrt(rss_abs / static_cast<double>(m));
    const double c_scale = std::max(std::abs(fit.c_old), std::abs(fit.c_new));
    fit.single_exponential = std::abs(fit.lambda_old - fit.lambda_new) < 1e-3 ||
                             std::min(std::abs(fit.c_old), std::abs(fit.c_new)) <
                                 1e-6 * c_scale ||
                             fit.c_old <= 0 || fit.c_new <= 0;
    return fit;
}

std::vector<Episode> segment_episodes(std::span<const double> values,
                                      std::span<const double> times,
                                      const sectors::CuspOptions& options) {
    if (values.size() < 32) throw ValidationError("segment_episodes: need at least 32 samples");
    const auto extrema = sectors::detect_cusps(values, times, options);
    std::vector<double> boundaries{times.front()};
    for (const auto& e : extrema)
        if (e.kind == sectors::ExtremumKind::cusp_max) boundaries.push_back(e.time);
    boundaries.push_back(times.back());

    std::vector<Episode> episodes;
    for (std::size_t b = 0; b + 1 < boundaries.size(); ++b) {
        Episode episode;
        episode.t_start = boundaries[b];
        episode.t_end = boundaries[b + 1];
        try {
            episode.fit = fit_crossing_episode(values, times, episode.t_start, episode.t_end);
        } catch (const std::exception& ex) {
            episode.error = ex.what();
        }
        episodes.push_back(std::move(episode));
    }
    return episodes;
}

} // namespace granular::fitkit
