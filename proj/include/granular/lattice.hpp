#pragma once

#include <cstdint>
#include <limits>
#include <vector>

namespace granular::lattice {

// Site counts saturate here instead of growing without bound; the model has
// no competition term, so overflow behavior has to be defined explicitly.
inline constexpr std::uint64_t kOverflowGuard = 1000000000000000ull; // 1e15

struct ReactionRates {
    double proliferation = 0; // birth rate per (k, a) pair per unit time
    double death = 0;         // death rate per k per unit time
    double a_diffusion = 0;   // hop rate per a agent per unit time
    double k_diffusion = 0;   // hop rate per k agent per unit time

    void validate() const;
};

// Per-site agent counts on a periodic hypercubic lattice. Resource agents
// (a) are conserved for the whole run; proliferating agents (k) are born on
// a-occupied sites and die at a constant rate.
struct LatticeState {
    int dims = 2;
    int side = 0;
    std::uint64_t seed = 0;
    std::vector<std::int32_t> a_count;
    std::vector<std::uint64_t> k_count;
    double time = 0;
    std::uint64_t step_index = 0;
    bool overflowed = false;

    std::size_t site_count() const { return a_count.size(); }
    std::int64_t total_a() const;
    double total_k() const;
    std::uint64_t max_site_k() const;
    std::int32_t max_site_a() const;
    double mean_a() const;
};

struct RunSummary {
    std::vector<double> times;
    std::vector<double> k_total;
    std::vector<std::int64_t> growth_set_size; // sites with s*A(x,t) > delta
    std::vector<std::uint64_t> max_site_k;
    std::vector<char> overflow; // sticky per record
    bool overflowed() const { return !overflow.empty() && overflow.back() != 0; }
};

struct StepOptions {
    bool well_mixed = false; // replace each site's a by the global mean
    int threads = 0;
};

struct RunOptions {
    bool well_mixed = false;
    double max_dt = std::numeric_limits<double>::infinity();
    int threads = 0;
};

double poisson_pmf(double mean, std::int64_t count);

// Sites draw i.i.d. Poisson(mean_a) resource counts; every site starts with
// k0_per_site proliferating agents. Deterministic per seed.
LatticeState init_lattice(int dims, int side, double mean_a,
                          std::uint64_t k0_per_site, std::uint64_t seed);

// Scalar (mean-field) growth rate g = s*A - delta.
double naive_growth_rate(const ReactionRates& rates, double mean_a);

// Survival condition s/D_A > 1 - Pol_d for the d-dimensional lattice.
// With D_A = 0 the condition reduces to s > 0.
bool survival_condition(const ReactionRates& rates, int dims);

// One synchronous tau-leap of length dt: per site, births ~ Poisson(s*k*a*dt),
// deaths ~ Binomial(k, delta*dt), hops ~ Binomial per agent class split
// uniformly over the 2d neighbors. All draws are taken against the pre-step
// state; total a is conserved exactly. Requires every per-agent event
// probability <= 0.5.
void step(LatticeState& state, const ReactionRates& rates, double dt,
          const StepOptions& options = {});

// Advance to horizon with adaptive sub-steps respecting the probability cap,
// recording at each record_interval. Sites reaching the overflow guard are
// frozen there and the run is flagged.
RunSummary run(LatticeState& state, const ReactionRates& rates, double horizon,
               double record_interval, const RunOptions& options = {});

} // namespace granular::lattice
