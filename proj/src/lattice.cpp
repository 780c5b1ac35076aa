#include "granular/lattice.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>

#include "granular/errors.hpp"
#include "granular/parallel.hpp"
#include "granular/rng.hpp"
#include "granular/walk.hpp"

namespace granular::lattice {

namespace {

constexpr double kMaxEventProbability = 0.5;

std::size_t checked_volume(int dims, int side) {
    if (dims < 1 || dims > 3) throw ValidationError("lattice: dims must be 1, 2 or 3");
    if (side < 2) throw ValidationError("lattice: side must be >= 2");
    std::size_t v = 1;
    for (int i = 0; i < dims; ++i) v *= static_cast<std::size_t>(side);
    if (v > (std::size_t{1} << 31)) throw ValidationError("lattice: volume too large");
    return v;
}

// Periodic nearest neighbor along axis (direction encodes axis and sign).
inline std::size_t neighbor(std::size_t site, int dir, int side, const std::size_t* stride) {
    const int axis = dir >> 1;
    const auto s = static_cast<std::size_t>(side);
    const std::size_t coord = (site / stride[axis]) % s;
    if (dir & 1) {
        return coord + 1 == s ? site + stride[axis] - stride[axis] * s
                              : site + stride[axis];
    }
    return coord == 0 ? site - stride[axis] + stride[axis] * s : site - stride[axis];
}

// Multinomial split of `movers` over `dirs` equally likely directions via
// sequential conditional binomials.
template <typename Int>
void split_directions(RngStream& rng, Int movers, int dirs, Int* out) {
    Int rem = movers;
    for (int j = 0; j < dirs - 1; ++j) {
        const double p = 1.0 / static_cast<double>(dirs - j);
        const Int take = rem > 0 ? static_cast<Int>(rng.binomial(static_cast<std::int64_t>(rem), p)) : 0;
        out[j] = take;
        rem -= take;
    }
    out[dirs - 1] = rem;
}

} // namespace

void ReactionRates::validate() const {
    if (proliferation < 0 || death < 0 || a_diffusion < 0 || k_diffusion < 0)
        throw ValidationError("lattice: reaction rates must be >= 0");
}

std::int64_t LatticeState::total_a() const {
    std::int64_t s = 0;
    for (auto a : a_count) s += a;
    return s;
}

double LatticeState::total_k() const {
    unsigned __int128 s = 0;
    for (auto k : k_count) s += k;
    return static_cast<double>(s);
}

std::uint64_t LatticeState::max_site_k() const {
    std::uint64_t m = 0;
    for (auto k : k_count) m = std::max(m, k);
    return m;
}

std::int32_t LatticeState::max_site_a() const {
    std::int32_t m = 0;
    for (auto a : a_count) m = std::max(m, a);
    return m;
}

double LatticeState::mean_a() const {
    return static_cast<double>(total_a()) / static_cast<double>(site_count());
}

double poisson_pmf(double mean, std::int64_t count) {
    if (mean < 0) throw ValidationError("poisson_pmf: mean must be >= 0");
    if (count < 0) throw ValidationError("poisson_pmf: count must be >= 0");
    if (mean == 0.0) return count == 0 ? 1.0 : 0.0;
    const double c = static_cast<double>(count);
    return std::exp(c * std::log(mean) - mean - std::lgamma(c + 1.0));
}

LatticeState init_lattice(int dims, int side, double mean_a,
                          std::uint64_t k0_per_site, std::uint64_t seed) {
    const std::size_t volume = checked_volume(dims, side);
    if (mean_a < 0) throw ValidationError("init_lattice: mean_a must be >= 0");
    if (k0_per_site > kOverflowGuard)
        throw ValidationError("init_lattice: k0 exceeds the overflow guard");
    LatticeState state;
    state.dims = dims;
    state.side = side;
    state.seed = seed;
    state.a_count.resize(volume);
    state.k_count.assign(volume, k0_per_site);
    for (std::size_t site = 0; site < volume; ++site) {
        RngStream rng(seed, static_cast<std::uint32_t>(site), 0, stream_tag::kLatticeInit);
        state.a_count[site] = static_cast<std::int32_t>(rng.poisson(mean_a));
    }
    return state;
}

double naive_growth_rate(const ReactionRates& rates, double mean_a) {
    return rates.proliferation * mean_a - rates.death;
}

bool survival_condition(const ReactionRates& rates, int dims) {
    if (dims < 1 || dims > 3) throw ValidationError("survival_condition: dims must be 1, 2 or 3");
    if (rates.a_diffusion == 0.0) return rates.proliferation > 0.0;
    const double polya = dims <= 2 ? 1.0 : walk::kReturnProbability3d;
    return rates.proliferation / rates.a_diffusion > 1.0 - polya;
}

void step(LatticeState& state, const ReactionRates& rates, double dt,
          const StepOptions& options) {
    rates.validate();
    if (!(dt > 0)) throw ValidationError("lattice step: dt must be > 0");
    const std::size_t volume = state.site_count();
    if (volume == 0) throw ValidationError("lattice step: uninitialized state");

    const double global_mean_a = state.mean_a();
    const double birth_a = options.well_mixed
                               ? global_mean_a
                               : static_cast<double>(state.max_site_a());
    const double max_rate = std::max({rates.death, rates.a_diffusion, rates.k_diffusion,
                                      rates.proliferation * birth_a});
    if (max_rate * dt > kMaxEventProbability + 1e-12)
        throw ValidationError("lattice step: dt too large; per-agent event probability "
                              "would exceed 0.5");

    const int two_d = 2 * state.dims;
    std::size_t stride[3] = {1, 1, 1};
    for (int axis = 1; axis < state.dims; ++axis)
        stride[axis] = stride[axis - 1] * static_cast<std::size_t>(state.side);

    const double p_death = rates.death * dt;
    const double p_k_move = rates.k_diffusion * dt;
    const double p_a_move = rates.a_diffusion * dt;

    std::vector<std::uint64_t> births(volume), deaths(volume), k_out(volume);
    std::vector<std::uint64_t> k_flux(volume * static_cast<std::size_t>(two_d));
    std::vector<std::int32_t> a_out(volume);
    std::vector<std::int32_t> a_flux(volume * static_cast<std::size_t>(two_d));

    const std::uint32_t step_lo = static_cast<std::uint32_t>(state.step_index);
    const std::uint32_t step_tag =
        stream_tag::kLatticeStep ^ static_cast<std::uint32_t>(state.step_index >> 32);

    // Pass 1: every site draws its events from its own stream, against the
    // pre-step state only.
    parallel_chunks(volume, options.threads, [&](std::size_t begin, std::size_t end, int) {
        for (std::size_t site = begin; site < end; ++site) {
            const auto k = static_cast<std::int64_t>(state.k_count[site]);
            const std::int32_t a = state.a_count[site];
            if (k == 0 && a == 0) continue;
            RngStream rng(state.seed, static_cast<std::uint32_t>(site), step_lo, step_tag);
            const double a_eff =
                options.well_mixed ? global_mean_a : static_cast<double>(a);
            if (k > 0) {
                const double birth_mean =
                    rates.proliferation * static_cast<double>(k) * a_eff * dt;
                births[site] = birth_mean > 0
                                   ? static_cast<std::uint64_t>(rng.poisson(birth_mean))
                                   : 0;
                const std::int64_t dead = p_death > 0 ? rng.binomial(k, p_death) : 0;
                deaths[site] = static_cast<std::uint64_t>(dead);
                std::int64_t movers = 0;
                if (p_k_move > 0) {
                    // Conditional draw keeps deaths + movers <= k while the
                    // marginal of movers stays Binomial(k, p_k_move).
                    const double p_cond = p_k_move / (1.0 - p_death);
                    movers = rng.binomial(k - dead, std::min(1.0, p_cond));
                }
                k_out[site] = static_cast<std::uint64_t>(movers);
                if (movers > 0) {
                    std::int64_t split[6];
                    split_directions(rng, movers, two_d, split);
                    for (int dir = 0; dir < two_d; ++dir)
                        k_flux[site * two_d + dir] = static_cast<std::uint64_t>(split[dir]);
                }
            }
            if (a > 0 && p_a_move > 0) {
                const auto movers =
                    static_cast<std::int32_t>(rng.binomial(a, p_a_move));
                a_out[site] = movers;
                if (movers > 0) {
                    std::int32_t split[6];
                    split_directions(rng, movers, two_d, split);
                    for (int dir = 0; dir < two_d; ++dir)
                        a_flux[site * two_d + dir] = split[dir];
                }
            }
        }
    });

    // Pass 2: apply the synchronous update; arrivals pull from the scratch
    // of each neighbor, so the merge is identical for any partitioning.
    std::atomic<bool> overflow{false};
    parallel_chunks(volume, options.threads, [&](std::size_t begin, std::size_t end, int) {
        for (std::size_t site = begin; site < end; ++site) {
            std::uint64_t k_new = state.k_count[site] - deaths[site] - k_out[site] +
                                  births[site];
            std::int32_t a_new = state.a_count[site] - a_out[site];
            for (int dir = 0; dir < two_d; ++dir) {
                const std::size_t nb = neighbor(site, dir, state.side, stride);
                const int opposite = dir ^ 1;
                k_new += k_flux[nb * two_d + opposite];
                a_new += a_flux[nb * two_d + opposite];
            }
            if (k_new > kOverflowGuard) {
                k_new = kOverflowGuard;
                overflow.store(true, std::memory_order_relaxed);
            }
            births[site] = k_new;                 // reuse scratch as the new k
            a_out[site] = a_new;                  // reuse scratch as the new a
        }
    });
    for (std::size_t site = 0; site < volume; ++site) {
        state.k_count[site] = births[site];
        state.a_count[site] = a_out[site];
    }
    if (overflow.load()) state.overflowed = true;
    state.time += dt;
    ++state.step_index;
}

RunSummary run(LatticeState& state, const ReactionRates& rates, double horizon,
               double record_interval, const RunOptions& options) {
    rates.validate();
    if (!(horizon > 0)) throw ValidationError("lattice run: horizon must be > 0");
    if (!(record_interval > 0))
        throw ValidationError("lattice run: record_interval must be > 0");

    RunSummary summary;
    const auto record = [&] {
        summary.times.push_back(state.time);
        summary.k_total.push_back(state.total_k());
        std::int64_t growth_sites = 0;
        if (options.well_mixed) {
            growth_sites = rates.proliferation * state.mean_a() > rates.death
                               ? static_cast<std::int64_t>(state.site_count())
                               : 0;
        } else {
            for (auto a : state.a_count)
                if (rates.proliferation * static_cast<double>(a) > rates.death)
                    ++growth_sites;
        }
        summary.growth_set_size.push_back(growth_sites);
        summary.max_site_k.push_back(state.max_site_k());
        summary.overflow.push_back(state.overflowed ? 1 : 0);
    };

    record();
    const double t_end = state.time + horizon;
    double next_record = state.time + record_interval;
    const StepOptions step_options{options.well_mixed, options.threads};
    while (state.time < t_end - 1e-12) {
        const double target = std::min(next_record, t_end);
        while (state.time < target - 1e-12) {
            const double birth_a = options.well_mixed
                                       ? state.mean_a()
                                       : static_cast<double>(state.max_site_a());
            const double max_rate =
                std::max({rates.death, rates.a_diffusion, rates.k_diffusion,
                          rates.proliferation * birth_a});
            double dt = target - state.time;
            if (max_rate > 0) dt = std::min(dt, kMaxEventProbability / max_rate);
            dt = std::min(dt, options.max_dt);
            step(state, rates, dt, step_options);
        }
        record();
        next_record += record_interval;
    }
    return summary;
}

} // namespace granular::lattice
