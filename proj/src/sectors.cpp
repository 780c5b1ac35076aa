#include "granular/sectors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string_view>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "granular/errors.hpp"
#include "granular/stats.hpp"

namespace granular::sectors {

namespace {

using Complex = std::complex<double>;

// ---- adaptive Dormand-Prince 5(4) for the linear system y' = G y ----

struct Rk45Result {
    std::vector<double> y;
};

void derivative(const GrowthMatrix& g, const std::vector<double>& y, std::vector<double>& dy) {
    const int n = g.n;
    for (int i = 0; i < n; ++i) {
        double s = 0;
        for (int j = 0; j < n; ++j) s += g.at(i, j) * y[static_cast<std::size_t>(j)];
        dy[static_cast<std::size_t>(i)] = s;
    }
}

std::vector<double> rk45_advance(const GrowthMatrix& g, std::vector<double> y, double t0,
                                 double t1, double rel_tol) {
    static constexpr double kA[7][6] = {
        {},
        {1.0 / 5},
        {3.0 / 40, 9.0 / 40},
        {44.0 / 45, -56.0 / 15, 32.0 / 9},
        {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
        {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
        {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
    static constexpr double kB5[7] = {35.0 / 384,     0.0,          500.0 / 1113, 125.0 / 192,
                                      -2187.0 / 6784, 11.0 / 84,    0.0};
    static constexpr double kB4[7] = {5179.0 / 57600,  0.0,           7571.0 / 16695,
                                      393.0 / 640,     -92097.0 / 339200,
                                      187.0 / 2100,    1.0 / 40};

    const auto n = y.size();
    if (t1 <= t0) return y;
    double t = t0;
    double h = (t1 - t0) / 16.0;
    const double h_min = (t1 - t0) * 1e-14;
    std::vector<std::vector<double>> k(7, std::vector<double>(n));
    std::vector<double> stage(n), y5(n), y4(n);
    int guard = 0;
    while (t < t1 - 1e-15 * std::max(1.0, std::abs(t1))) {
        if (++guard > 2000000) throw NumericError("rk45: step budget exhausted");
        h = std::min(h, t1 - t);
        derivative(g, y, k[0]);
        for (int s = 1; s < 7; ++s) {
            for (std::size_t i = 0; i < n; ++i) {
                double acc = y[i];
                for (int j = 0; j < s; ++j) acc += h * kA[s][j] * k[j][i];
                stage[i] = acc;
            }
            derivative(g, stage, k[s]);
        }
        double err = 0, scale_max = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double acc5 = y[i], acc4 = y[i];
            for (int j = 0; j < 7; ++j) {
                acc5 += h * kB5[j] * k[j][i];
                acc4 += h * kB4[j] * k[j][i];
            }
            y5[i] = acc5;
            y4[i] = acc4;
            const double scale = std::max({std::abs(y[i]), std::abs(acc5), 1e-300});
            err = std::max(err, std::abs(acc5 - acc4) / scale);
            scale_max = std::max(scale_max, scale);
        }
        if (err <= rel_tol || h <= h_min) {
            t += h;
            y = y5;
        }
        const double grow = err > 0 ? 0.9 * std::pow(rel_tol / err, 0.2) : 4.0;
        h *= std::clamp(grow, 0.2, 4.0);
        if (h < h_min) h = h_min;
    }
    return y;
}

EigenSystem eigen_solve_2x2(const GrowthMatrix& g) {
    const double a = g.at(0, 0), b = g.at(0, 1), c = g.at(1, 0), d = g.at(1, 1);
    const double trace = a + d;
    const double det = a * d - b * c;
    const double scale = std::max(1.0, g.max_abs());
    const double disc = trace * trace - 4.0 * det;

    EigenSystem sys;
    sys.n = 2;
    sys.values.resize(2);
    sys.vectors.assign(4, Complex{0, 0});

    if (disc >= 0) {
        const double root = std::sqrt(disc);
        const double l1 = 0.5 * (trace + root);
        const double l2 = 0.5 * (trace - root);
        sys.values = {Complex{l1, 0}, Complex{l2, 0}};
        const double tol = 1e-14 * scale;
        auto fill_vector = [&](int column, double lambda) {
            double v0, v1;
            if (std::abs(b) > tol) {
                v0 = b;
                v1 = lambda - a;
            } else if (std::abs(c) > tol) {
                v0 = lambda - d;
                v1 = c;
            } else {
                // diagonal matrix: coordinate directions
                v0 = std::abs(lambda - a) <= std::abs(lambda - d) ? 1.0 : 0.0;
                v1 = 1.0 - v0;
            }
            const double norm = std::hypot(v0, v1);
            sys.vectors[static_cast<std::size_t>(column) * 2 + 0] = Complex{v0 / norm, 0};
            sys.vectors[static_cast<std::size_t>(column) * 2 + 1] = Complex{v1 / norm, 0};
        };
        fill_vector(0, l1);
        fill_vector(1, l2);
        if (root <= 1e-12 * scale) {
            // repeated eigenvalue: complete basis only if G is (close to) a
            // multiple of the identity
            const double lambda = 0.5 * trace;
            const bool scalar = std::abs(a - lambda) <= tol && std::abs(d - lambda) <= tol &&
                                std::abs(b) <= tol && std::abs(c) <= tol;
            if (scalar) {
                sys.vectors = {Complex{1, 0}, Complex{0, 0}, Complex{0, 0}, Complex{1, 0}};
            } else {
                sys.complete_basis = false;
            }
        }
    } else {
        const double real = 0.5 * trace;
        const double imag = 0.5 * std::sqrt(-disc);
        sys.values = {Complex{real, imag}, Complex{real, -imag}};
        for (int column = 0; column < 2; ++column) {
            const Complex lambda = sys.values[static_cast<std::size_t>(column)];
            Complex v0, v1;
            if (std::abs(b) > 1e-14 * scale) {
                v0 = Complex{b, 0};
                v1 = lambda - a;
            } else {
                v0 = lambda - d;
                v1 = Complex{c, 0};
            }
            const double norm = std::sqrt(std::norm(v0) + std::norm(v1));
            sys.vectors[static_cast<std::size_t>(column) * 2 + 0] = v0 / norm;
            sys.vectors[static_cast<std::size_t>(column) * 2 + 1] = v1 / norm;
        }
    }
    return sys;
}

EigenSystem eigen_solve_general(const GrowthMatrix& g) {
    const int n = g.n;
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = g.at(i, j);
    Eigen::EigenSolver<Eigen::MatrixXd> solver(m, /*computeEigenvectors=*/true);
    if (solver.info() != Eigen::Success)
        throw NumericError("eigen_solve: iteration failed to converge");

    EigenSystem sys;
    sys.n = n;
    sys.values.resize(static_cast<std::size_t>(n));
    sys.vectors.resize(static_cast<std::size_t>(n) * n);
    for (int j = 0; j < n; ++j) {
        sys.values[static_cast<std::size_t>(j)] = solver.eigenvalues()(j);
        for (int i = 0; i < n; ++i)
            sys.vectors[static_cast<std::size_t>(j) * n + i] = solver.eigenvectors()(i, j);
    }
    // Completeness: the eigenvector matrix must be far from singular.
    Eigen::MatrixXcd v = solver.eigenvectors();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(v);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(n - 1);
    sys.complete_basis = smin > 1e-10 * smax;
    return sys;
}

void finalize_eigen(const GrowthMatrix& g, EigenSystem& sys) {
    const int n = sys.n;
    double residual = 0;
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            Complex acc{0, 0};
            for (int l = 0; l < n; ++l) acc += g.at(i, l) * sys.vector_at(j, l);
            acc -= sys.values[static_cast<std::size_t>(j)] * sys.vector_at(j, i);
            residual = std::max(residual, std::abs(acc));
        }
    }
    sys.residual = residual;
    // Dominant eigenvalue: largest real part; for Metzler matrices this is
    // the (real) Perron root.
    int best = 0;
    for (int j = 1; j < n; ++j)
        if (sys.values[static_cast<std::size_t>(j)].real() >
            sys.values[static_cast<std::size_t>(best)].real())
            best = j;
    sys.lambda_max_index = best;
    sys.lambda_max = sys.values[static_cast<std::size_t>(best)].real();
}

std::vector<Complex> solve_coordinates(const EigenSystem& sys, std::span<const double> k0) {
    const int n = sys.n;
    Eigen::MatrixXcd v(n, n);
    Eigen::VectorXcd rhs(n);
    for (int i = 0; i < n; ++i) {
        rhs(i) = Complex{k0[static_cast<std::size_t>(i)], 0};
        for (int j = 0; j < n; ++j) v(i, j) = sys.vector_at(j, i);
    }
    Eigen::VectorXcd c = v.partialPivLu().solve(rhs);
    std::vector<Complex> coefficients(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) coefficients[static_cast<std::size_t>(j)] = c(j);
    return coefficients;
}

std::vector<double> evaluate_modes(const EigenSystem& sys,
                                   const std::vector<Complex>& coefficients, double t) {
    const int n = sys.n;
    std::vector<double> out(static_cast<std::size_t>(n));
    double max_imag = 0, max_real = 0;
    for (int i = 0; i < n; ++i) {
        Complex acc{0, 0};
        for (int j = 0; j < n; ++j)
            acc += coefficients[static_cast<std::size_t>(j)] *
                   std::exp(sys.values[static_cast<std::size_t>(j)] * t) * sys.vector_at(j, i);
        out[static_cast<std::size_t>(i)] = acc.real();
        max_imag = std::max(max_imag, std::abs(acc.imag()));
        max_real = std::max(max_real, std::abs(acc.real()));
    }
    if (max_imag > 1e-8 * std::max(1.0, max_real))
        throw NumericError("analytic_solution: residual imaginary part; "
                           "conjugate modes failed to cancel");
    return out;
}

} // namespace

GrowthMatrix GrowthMatrix::zero(int n) {
    if (n < 1) throw ValidationError("growth matrix: dimension must be >= 1");
    GrowthMatrix g;
    g.n = n;
    g.entries.assign(static_cast<std::size_t>(n) * n, 0.0);
    return g;
}

GrowthMatrix GrowthMatrix::diagonal(std::vector<double> rates) {
    auto g = zero(static_cast<int>(rates.size()));
    for (int i = 0; i < g.n; ++i) g.at(i, i) = rates[static_cast<std::size_t>(i)];
    return g;
}

GrowthMatrix GrowthMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
    const int n = static_cast<int>(rows.size());
    auto g = zero(n);
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(rows[static_cast<std::size_t>(i)].size()) != n)
            throw ValidationError("growth matrix: matrix must be square");
        for (int j = 0; j < n; ++j) g.at(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    g.validate();
    return g;
}

double GrowthMatrix::max_abs() const {
    double m = 0;
    for (double e : entries) m = std::max(m, std::abs(e));
    return m;
}

void GrowthMatrix::validate() const {
    if (n < 1) throw ValidationError("growth matrix: dimension must be >= 1");
    if (entries.size() != static_cast<std::size_t>(n) * n)
        throw ValidationError("growth matrix: entry count does not match dimension");
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j && at(i, j) < 0)
                throw ValidationError("growth matrix: off-diagonal transfers must be >= 0");
}

GrowthMatrix build_policy_matrix(double g11, double g22, double mu) {
    if (mu < 0) throw ValidationError("build_policy_matrix: mu must be >= 0");
    auto g = GrowthMatrix::zero(2);
    g.at(0, 0) = g11 - mu / 2;
    g.at(0, 1) = mu / 2;
    g.at(1, 0) = mu / 2;
    g.at(1, 1) = g22 - mu / 2;
    return g;
}

EigenSystem eigen_solve(const GrowthMatrix& g) {
    g.validate();
    EigenSystem sys = g.n == 2 ? eigen_solve_2x2(g) : eigen_solve_general(g);
    finalize_eigen(g, sys);
    return sys;
}

std::vector<double> analytic_solution(const GrowthMatrix& g, std::span<const double> k0,
                                      double t) {
    AnalyticPropagator propagator(g, k0);
    return propagator.at(t);
}

AnalyticPropagator::AnalyticPropagator(const GrowthMatrix& g, std::span<const double> k0)
    : eigen_(eigen_solve(g)) {
    if (static_cast<int>(k0.size()) != g.n)
        throw ValidationError("analytic_solution: initial state size does not match matrix");
    if (!eigen_.complete_basis)
        throw NumericError("analytic_solution: defective matrix (incomplete eigenbasis); "
                           "use the numerical integrator");
    coefficients_ = solve_coordinates(eigen_, k0);
}

std::vector<double> AnalyticPropagator::at(double t) const {
    return evaluate_modes(eigen_, coefficients_, t);
}

void ShockSchedule::validate() const {
    if (segments.empty()) throw ValidationError("schedule: at least one segment required");
    if (initial_state.empty()) throw ValidationError("schedule: initial state required");
    const int n = static_cast<int>(initial_state.size());
    for (double v : initial_state)
        if (!(v > 0)) throw ValidationError("schedule: initial state must be > 0 componentwise");
    if (segments.front().start != 0.0)
        throw ValidationError("schedule: first segment must start at t = 0");
    double prev = -1;
    for (const auto& segment : segments) {
        if (segment.start <= prev)
            throw ValidationError("schedule: segment start times must be strictly increasing");
        prev = segment.start;
        segment.matrix.validate();
        if (segment.matrix.n != n)
            throw ValidationError("schedule: segment matrix dimension does not match state");
    }
}

const GrowthMatrix& ShockSchedule::matrix_at(double t) const {
    const GrowthMatrix* match = &segments.front().matrix;
    for (const auto& segment : segments) {
        if (segment.start <= t) match = &segment.matrix;
        else break;
    }
    return *match;
}

SectorTrajectory integrate(const ShockSchedule& schedule, std::span<const double> t_grid,
                           IntegrationMethod method) {
    schedule.validate();
    if (t_grid.empty()) throw ValidationError("integrate: empty time grid");
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        if (t_grid[i] < 0) throw ValidationError("integrate: grid times must be >= 0");
        if (i > 0 && t_grid[i] <= t_grid[i - 1])
            throw ValidationError("integrate: grid must be strictly increasing");
    }

    const int n = static_cast<int>(schedule.initial_state.size());
    SectorTrajectory trajectory;
    trajectory.n = n;
    trajectory.times.assign(t_grid.begin(), t_grid.end());
    trajectory.k.resize(t_grid.size() * static_cast<std::size_t>(n));
    trajectory.k_tot.resize(t_grid.size());
    trajectory.rates.resize(t_grid.size() * static_cast<std::size_t>(n));

    // Tight enough that the absolute cross-check error against the analytic
    // route stays below 1e-8 even when trajectories grow by four decades.
    constexpr double kRelTol = 1e-13;
    std::vector<double> segment_state = schedule.initial_state;
    std::size_t gi = 0;

    for (std::size_t si = 0; si < schedule.segments.size(); ++si) {
        const auto& segment = schedule.segments[si];
        const double seg_start = segment.start;
        const double seg_end = si + 1 < schedule.segments.size()
                                   ? schedule.segments[si + 1].start
                                   : std::numeric_limits<double>::infinity();
        bool analytic = method != IntegrationMethod::numerical;
        std::unique_ptr<AnalyticPropagator> propagator;
        if (analytic) {
            try {
                propagator = std::make_unique<AnalyticPropagator>(segment.matrix, segment_state);
            } catch (const NumericError&) {
                if (method == IntegrationMethod::analytic) throw;
                analytic = false; // defective: fall back to the integrator
            }
        }
        std::vector<double> cursor_state = segment_state;
        double cursor_time = seg_start;
        while (gi < t_grid.size() && (t_grid[gi] < seg_end || si + 1 == schedule.segments.size())) {
            const double t = t_grid[gi];
            std::vector<double> value;
            if (analytic) {
                value = propagator->at(t - seg_start);
            } else {
                cursor_state = rk45_advance(segment.matrix, std::move(cursor_state),
                                            cursor_time, t, kRelTol);
                cursor_time = t;
                value = cursor_state;
            }
            double total = 0;
            for (int i = 0; i < n; ++i) {
                const double v = value[static_cast<std::size_t>(i)];
                trajectory.k[gi * static_cast<std::size_t>(n) + static_cast<std::size_t>(i)] = v;
                total += v;
            }
            trajectory.k_tot[gi] = total;
            for (int i = 0; i < n; ++i) {
                double flow = 0;
                for (int j = 0; j < n; ++j)
                    flow += segment.matrix.at(i, j) * value[static_cast<std::size_t>(j)];
                trajectory.rates[gi * static_cast<std::size_t>(n) + static_cast<std::size_t>(i)] =
                    value[static_cast<std::size_t>(i)] != 0
                        ? flow / value[static_cast<std::size_t>(i)]
                        : 0.0;
            }
            ++gi;
        }
        if (gi >= t_grid.size()) break;
        // advance the state to the segment boundary to seed the next segment
        if (std::isfinite(seg_end)) {
            if (analytic) {
                segment_state = propagator->at(seg_end - seg_start);
            } else {
                segment_state = rk45_advance(segment.matrix, std::move(cursor_state),
                                             cursor_time, seg_end, kRelTol);
            }
        }
    }
    return trajectory;
}

double asymptotic_ratio(const GrowthMatrix& g) {
    if (g.n != 2) throw ValidationError("asymptotic_ratio: defined for 2x2 matrices");
    const auto sys = eigen_solve(g);
    const auto l0 = sys.values[0], l1 = sys.values[1];
    const double scale = std::max(1.0, g.max_abs());
    if (std::abs(l0 - l1) <= 1e-12 * scale)
        throw NumericError("asymptotic_ratio: degenerate dominant eigenvalue");
    const int j = sys.lambda_max_index;
    double u0 = sys.vector_at(j, 0).real();
    double u1 = sys.vector_at(j, 1).real();
    if (u0 < 0 || (u0 == 0 && u1 < 0)) {
        u0 = -u0;
        u1 = -u1;
    }
    if (u1 == 0) return std::numeric_limits<double>::infinity();
    return u0 / u1;
}

std::string_view extremum_kind_name(ExtremumKind kind) {
    switch (kind) {
    case ExtremumKind::cusp_max: return "cusp-max";
    case ExtremumKind::smooth_max: return "smooth-max";
    case ExtremumKind::cusp_min: return "cusp-min";
    case ExtremumKind::smooth_min: return "smooth-min";
    }
    return "unknown";
}

std::vector<Extremum> detect_cusps(std::span<const double> values,
                                   std::span<const double> times,
                                   const CuspOptions& options) {
    const std::size_t n = values.size();
    if (n < 16) throw ValidationError("detect_cusps: need at least 16 samples");
    if (times.size() != n) throw ValidationError("detect_cusps: times/values size mismatch");
    for (double v : values)
        if (!(v > 0)) throw ValidationError("detect_cusps: series must be strictly positive "
                                            "(analysis runs on the log series)");
    const double dt = times[1] - times[0];
    for (std::size_t i = 1; i < n; ++i)
        if (std::abs((times[i] - times[i - 1]) - dt) > 1e-6 * std::max(1.0, std::abs(dt)))
            throw ValidationError("detect_cusps: series must be uniformly sampled");
    if (!(options.theta > 0)) throw ValidationError("detect_cusps: theta must be > 0");

    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = std::log(values[i]);

    std::size_t w = options.window > 0 ? static_cast<std::size_t>(options.window) : 1;
    w = std::min(w, (n - 1) / 2);

    std::vector<double> d2(n, 0.0);
    std::vector<double> magnitudes;
    for (std::size_t i = w; i + w < n; ++i) {
        d2[i] = z[i + w] - 2.0 * z[i] + z[i - w];
        magnitudes.push_back(std::abs(d2[i]));
    }
    double med = stats::median(magnitudes);
    if (med <= 0) {
        double max_mag = 0;
        for (double m : magnitudes) max_mag = std::max(max_mag, m);
        med = std::max(max_mag * 1e-12, 1e-300);
    }
    const double threshold = options.theta * med;

    std::vector<Extremum> extrema;
    for (std::size_t i = w; i + w < n; ++i) {
        bool is_max = true, is_min = true;
        for (std::size_t j = i - w; j <= i + w; ++j) {
            if (j == i) continue;
            if (z[j] >= z[i]) is_max = false;
            if (z[j] <= z[i]) is_min = false;
            if (!is_max && !is_min) break;
        }
        if (!is_max && !is_min) continue;
        Extremum e;
        e.time = times[i];
        e.index = i;
        e.second_difference = d2[i];
        e.threshold = threshold;
        if (is_max) {
            e.kind = d2[i] < -threshold ? ExtremumKind::cusp_max : ExtremumKind::smooth_max;
        } else {
            e.kind = (d2[i] > 0 && d2[i] < threshold) ? ExtremumKind::smooth_min
                                                      : ExtremumKind::cusp_min;
        }
        extrema.push_back(e);
    }
    return extrema;
}

} // namespace granular::sectors
