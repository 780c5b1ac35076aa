#pragma once

#include <span>
#include <vector>

namespace granular::stats {

double mean(std::span<const double> xs);
double variance(std::span<const double> xs); // sample variance (n-1)
double median(std::vector<double> xs);       // by value; sorts its copy

// Type-7 (linear interpolation) quantile of an already sorted vector.
double quantile_sorted(const std::vector<double>& sorted, double q);

// Robust width: interquartile range / 1.349, the Gaussian-consistent scale.
// Used wherever a second moment may not exist.
double iqr_sigma(std::vector<double> xs);

struct LineFit {
    double slope = 0;
    double intercept = 0;
    double slope_se = 0;
    double intercept_se = 0;
    double r2 = 0;
    int n = 0;
};

// Ordinary least squares y = intercept + slope * x.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

} // namespace granular::stats
