#include "granular/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "granular/errors.hpp"

namespace granular::stats {

double mean(std::span<const double> xs) {
    if (xs.empty()) throw ValidationError("mean: empty sample");
    double s = 0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

double variance(std::span<const double> xs) {
    if (xs.size() < 2) throw ValidationError("variance: need at least 2 samples");
    const double m = mean(xs);
    double s = 0;
    for (double x : xs) s += (x - m) * (x - m);
    return s / static_cast<double>(xs.size() - 1);
}

double median(std::vector<double> xs) {
    if (xs.empty()) throw ValidationError("median: empty sample");
    std::sort(xs.begin(), xs.end());
    return quantile_sorted(xs, 0.5);
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) throw ValidationError("quantile: empty sample");
    if (q <= 0) return sorted.front();
    if (q >= 1) return sorted.back();
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(lo);
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

double iqr_sigma(std::vector<double> xs) {
    if (xs.size() < 4) throw ValidationError("iqr_sigma: need at least 4 samples");
    std::sort(xs.begin(), xs.end());
    const double iqr = quantile_sorted(xs, 0.75) - quantile_sorted(xs, 0.25);
    return iqr / 1.349;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ValidationError("fit_line: size mismatch");
    const auto n = x.size();
    if (n < 2) throw ValidationError("fit_line: need at least 2 points");
    const double mx = mean(x);
    const double my = mean(y);
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx <= 0) throw ValidationError("fit_line: degenerate abscissa");
    LineFit fit;
    fit.n = static_cast<int>(n);
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ssr = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - (fit.intercept + fit.slope * x[i]);
        ssr += r * r;
    }
    fit.r2 = syy > 0 ? 1.0 - ssr / syy : 1.0;
    if (n > 2) {
        const double s2 = ssr / static_cast<double>(n - 2);
        fit.slope_se = std::sqrt(s2 / sxx);
        fit.intercept_se = std::sqrt(s2 * (1.0 / static_cast<double>(n) + mx * mx / sxx));
    }
    return fit;
}

} // namespace granular::stats
