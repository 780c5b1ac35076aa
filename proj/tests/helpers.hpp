#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

// Test-only oracles, independent of the library implementation paths they
// check.

namespace testhelpers {

// Exact C(n, k) in double (n small enough that the product form is exact).
inline double binomial_coefficient(int n, int k) {
    double v = 1.0;
    for (int i = 1; i <= k; ++i)
        v = v * static_cast<double>(n - k + i) / static_cast<double>(i);
    return v;
}

// Closed-form simple-walk return probability at even lag: C(2t,t)/2^(2t) in
// 1d; its square in 2d (independent diagonal components).
inline double walk_return_closed_form(int dimension, int lag) {
    const int t = lag / 2;
    const double p1 = binomial_coefficient(lag, t) / std::pow(2.0, lag);
    return dimension == 1 ? p1 : p1 * p1;
}

// Wilson-Hilferty approximation to the chi-squared quantile; plenty for
// p > 0.01 style goodness-of-fit gates.
inline double chi2_quantile(double p, int dof) {
    // inverse normal via Acklam's rational approximation
    const auto inv_norm = [](double q) {
        static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
        static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
        static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
        static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
        const double plow = 0.02425;
        if (q < plow) {
            const double r = std::sqrt(-2 * std::log(q));
            return (((((c[0] * r + c[1]) * r + c[2]) * r + c[3]) * r + c[4]) * r + c[5]) /
                   ((((d[0] * r + d[1]) * r + d[2]) * r + d[3]) * r + 1);
        }
        if (q > 1 - plow) {
            const double r = std::sqrt(-2 * std::log(1 - q));
            return -(((((c[0] * r + c[1]) * r + c[2]) * r + c[3]) * r + c[4]) * r + c[5]) /
                   ((((d[0] * r + d[1]) * r + d[2]) * r + d[3]) * r + 1);
        }
        const double r = q - 0.5, s = r * r;
        return (((((a[0] * s + a[1]) * s + a[2]) * s + a[3]) * s + a[4]) * s + a[5]) * r /
               (((((b[0] * s + b[1]) * s + b[2]) * s + b[3]) * s + b[4]) * s + 1);
    };
    const double z = inv_norm(p);
    const double k = dof;
    const double term = 1.0 - 2.0 / (9.0 * k) + z * std::sqrt(2.0 / (9.0 * k));
    return k * term * term * term;
}

// Kolmogorov-Smirnov statistic of samples against a CDF.
template <typename Cdf>
double ks_statistic(std::vector<double> samples, Cdf cdf) {
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double ks = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        ks = std::max(ks, std::abs((static_cast<double>(i) + 1.0) / n - f));
        ks = std::max(ks, std::abs(f - static_cast<double>(i) / n));
    }
    return ks;
}

inline double mean_of(std::span<const double> xs) {
    double s = 0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

} // namespace testhelpers
