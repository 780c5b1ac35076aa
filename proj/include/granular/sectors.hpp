#pragma once

#include <complex>
#include <span>
#include <string_view>
#include <vector>

namespace granular::sectors {

// Growth matrix G of dK/dt = G K: diagonal entries are intrinsic sector
// rates, off-diagonal entries are capital transfers and must be >= 0
// (Metzler structure; it is what keeps trajectories positive).
struct GrowthMatrix {
    int n = 0;
    std::vector<double> entries; // row-major

    static GrowthMatrix zero(int n);
    static GrowthMatrix diagonal(std::vector<double> rates);
    static GrowthMatrix from_rows(const std::vector<std::vector<double>>& rows);

    double& at(int i, int j) { return entries[static_cast<std::size_t>(i) * n + j]; }
    double at(int i, int j) const { return entries[static_cast<std::size_t>(i) * n + j]; }
    double max_abs() const;
    void validate() const;
};

// Two-sector transfer policy: a flat tax mu moved symmetrically between the
// sectors, [[g11 - mu/2, mu/2], [mu/2, g22 - mu/2]].
GrowthMatrix build_policy_matrix(double g11, double g22, double mu);

struct EigenSystem {
    int n = 0;
    std::vector<std::complex<double>> values;
    std::vector<std::complex<double>> vectors; // column-major: vectors[j*n + i]
    bool complete_basis = true;
    double lambda_max = 0;
    int lambda_max_index = 0;
    double residual = 0; // max ||G u - lambda u||_inf over eigenpairs

    std::complex<double> vector_at(int j, int i) const {
        return vectors[static_cast<std::size_t>(j) * n + i];
    }
};

// Closed-form quadratic for n = 2, iterative (Eigen) for larger n, with a
// residual check. A defective matrix is flagged complete_basis = false and
// analytic evaluation refuses it.
EigenSystem eigen_solve(const GrowthMatrix& g);

// K(t) from the eigenbasis: coordinates of K(0) solved against the (possibly
// non-orthogonal) eigenvector matrix, then propagated by e^(lambda_i t).
std::vector<double> analytic_solution(const GrowthMatrix& g, std::span<const double> k0,
                                      double t);

// Precomputed propagator for repeated evaluation along one segment.
class AnalyticPropagator {
public:
    AnalyticPropagator(const GrowthMatrix& g, std::span<const double> k0);
    std::vector<double> at(double t) const; // t relative to segment start

private:
    EigenSystem eigen_;
    std::vector<std::complex<double>> coefficients_;
};

struct ShockSchedule {
    struct Segment {
        double start = 0;
        GrowthMatrix matrix;
    };
    std::vector<Segment> segments;     // start times strictly increasing, first = 0
    std::vector<double> initial_state; // all components > 0

    void validate() const;
    const GrowthMatrix& matrix_at(double t) const;
};

enum class IntegrationMethod { automatic, analytic, numerical };

struct SectorTrajectory {
    std::vector<double> times;
    int n = 0;
    std::vector<double> k;     // times-major: k[ti*n + i]
    std::vector<double> k_tot; // sum over sectors per time
    std::vector<double> rates; // instantaneous log-growth (G K)_i / K_i

    std::span<const double> state_at(std::size_t ti) const {
        return {k.data() + ti * static_cast<std::size_t>(n), static_cast<std::size_t>(n)};
    }
    std::span<const double> rates_at(std::size_t ti) const {
        return {rates.data() + ti * static_cast<std::size_t>(n), static_cast<std::size_t>(n)};
    }
};

// Piecewise-constant-G trajectory on the given grid. Analytic per segment
// when the eigenbasis is complete; numerical forces the adaptive
// Dormand-Prince integrator (relative tolerance 1e-10), which also serves
// as the independent cross-check of the analytic route.
SectorTrajectory integrate(const ShockSchedule& schedule, std::span<const double> t_grid,
                           IntegrationMethod method = IntegrationMethod::automatic);

// Dominant-eigenvector component ratio u1/u2 of a 2x2 matrix: the asymptotic
// sector size ratio.
double asymptotic_ratio(const GrowthMatrix& g);

enum class ExtremumKind { cusp_max, smooth_max, cusp_min, smooth_min };
std::string_view extremum_kind_name(ExtremumKind kind);

struct Extremum {
    double time = 0;
    std::size_t index = 0;
    ExtremumKind kind = ExtremumKind::smooth_min;
    double second_difference = 0; // of the log-series, at lag w
    double threshold = 0;         // theta * median |second difference|
};

struct CuspOptions {
    double theta = 10.0; // curvature ratio separating cusps from smooth extrema
    int window = 1;      // second-difference lag; > 1 trades resolution for
                         // noise robustness (signal grows ~linearly in the
                         // lag, sampling noise stays flat)
};

// Classify the local extrema of a positive, uniformly sampled series from
// the discrete second difference of its log. Maxima with second difference
// below -theta * median|d2| are cusps; minima below the same magnitude
// threshold are smooth.
std::vector<Extremum> detect_cusps(std::span<const double> values,
                                   std::span<const double> times,
                                   const CuspOptions& options = {});

} // namespace granular::sectors
