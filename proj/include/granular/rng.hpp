#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "granular/errors.hpp"

namespace granular {

// Counter-based generator (Philox-4x32-10). A stream is identified by
// (seed, id0, id1, id2); draws depend only on that identity and the number
// of values consumed, never on other streams. This is what makes ensemble
// results independent of execution order and thread count: every walker,
// path or (site, step) pair owns its own stream.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed, std::uint32_t id0 = 0,
                       std::uint32_t id1 = 0, std::uint32_t id2 = 0)
        : key_{static_cast<std::uint32_t>(seed),
               static_cast<std::uint32_t>(seed >> 32)},
          id_{id0, id1, id2} {}

    std::uint32_t next_u32() {
        if (pos_ == 4) refill();
        return buf_[pos_++];
    }

    std::uint64_t next_u64() {
        const std::uint64_t lo = next_u32();
        const std::uint64_t hi = next_u32();
        return lo | (hi << 32);
    }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform in (0, 1]; safe under negative powers and logs.
    double uniform_open01() { return 1.0 - uniform01(); }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    // Unbiased integer in [0, bound) via Lemire's method with rejection.
    std::uint32_t below(std::uint32_t bound) {
        std::uint64_t m = static_cast<std::uint64_t>(next_u32()) * bound;
        auto lo = static_cast<std::uint32_t>(m);
        if (lo < bound) {
            const std::uint32_t threshold = (0u - bound) % bound;
            while (lo < threshold) {
                m = static_cast<std::uint64_t>(next_u32()) * bound;
                lo = static_cast<std::uint32_t>(m);
            }
        }
        return static_cast<std::uint32_t>(m >> 32);
    }

    double gaussian() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform01() - 1.0;
            v = 2.0 * uniform01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        cached_ = v * f;
        have_cached_ = true;
        return u * f;
    }

    // Poisson draw. Knuth inversion below the crossover, normal
    // approximation above it (relative moment error is negligible there
    // and the cost stays O(1) for the huge per-site means the lattice hits).
    std::int64_t poisson(double mean) {
        if (!(mean >= 0.0)) throw ValidationError("poisson: mean must be >= 0");
        if (mean == 0.0) return 0;
        if (mean <= 60.0) {
            const double limit = std::exp(-mean);
            std::int64_t k = 0;
            double p = 1.0;
            do {
                ++k;
                p *= uniform01();
            } while (p > limit);
            return k - 1;
        }
        const double x = mean + std::sqrt(mean) * gaussian();
        return x <= 0.0 ? 0 : static_cast<std::int64_t>(std::llround(x));
    }

    // Binomial draw supporting huge trial counts. BINV sequential search
    // when n*p is small, normal approximation otherwise; support is always
    // clamped to [0, trials] so agent counts stay consistent.
    std::int64_t binomial(std::int64_t trials, double p) {
        if (trials < 0) throw ValidationError("binomial: negative trial count");
        if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("binomial: p outside [0,1]");
        if (trials == 0 || p == 0.0) return 0;
        if (p == 1.0) return trials;
        if (p > 0.5) return trials - binomial(trials, 1.0 - p);
        const double np = static_cast<double>(trials) * p;
        if (np <= 30.0) {
            // (1-p)^n via log1p keeps the start of the CDF accurate.
            double q = std::exp(static_cast<double>(trials) * std::log1p(-p));
            const double r = p / (1.0 - p);
            double s = q;
            const double u = uniform01();
            std::int64_t x = 0;
            while (u > s && x < trials) {
                ++x;
                q *= r * static_cast<double>(trials - x + 1) / static_cast<double>(x);
                s += q;
                if (q <= 0.0) break; // numerical floor; tail mass ~0
            }
            return x;
        }
        const double sd = std::sqrt(np * (1.0 - p));
        const double x = np + sd * gaussian();
        if (x <= 0.0) return 0;
        auto k = static_cast<std::int64_t>(std::llround(x));
        return k > trials ? trials : k;
    }

    // Refill the direction batch for d-dimensional lattice walks: up to
    // `Count` unbiased draws in [0, 2d) extracted from a single 64-bit
    // value by base-(2d) digit decomposition. Cuts the per-step RNG cost
    // several-fold in the walk-heavy estimators.
    template <int TwoD, int Count>
    void fill_directions(std::uint8_t* out) {
        static_assert(TwoD >= 2 && TwoD <= 6);
        static_assert(Count >= 1);
        static_assert([] {
            unsigned __int128 v = 1;
            for (int i = 0; i < Count; ++i) v *= TwoD;
            return v <= static_cast<unsigned __int128>(~std::uint64_t{0});
        }(), "TwoD^Count must fit in 64 bits");
        constexpr std::uint64_t kPow = [] {
            std::uint64_t v = 1;
            for (int i = 0; i < Count; ++i) v *= TwoD;
            return v;
        }();
        constexpr std::uint64_t kAccept = (~std::uint64_t{0} / kPow) * kPow;
        std::uint64_t v;
        do {
            v = next_u64();
        } while (v >= kAccept);
        v %= kPow;
        for (int i = 0; i < Count; ++i) {
            out[i] = static_cast<std::uint8_t>(v % TwoD);
            v /= TwoD;
        }
    }

private:
    void refill() {
        // Philox-4x32-10 block function.
        std::array<std::uint32_t, 4> ctr{static_cast<std::uint32_t>(counter_),
                                         id_[0], id_[1],
                                         id_[2] ^ static_cast<std::uint32_t>(counter_ >> 32)};
        std::array<std::uint32_t, 2> key = key_;
        constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
        constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
            ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
                   static_cast<std::uint32_t>(p1),
                   static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
                   static_cast<std::uint32_t>(p0)};
            key[0] += kW0;
            key[1] += kW1;
        }
        buf_ = ctr;
        ++counter_;
        pos_ = 0;
    }

    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 3> id_;
    std::uint64_t counter_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int pos_ = 4;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

// Stream purpose tags: distinct id2 values per module so streams are never
// reused across unrelated draws of the same (seed, index).
namespace stream_tag {
inline constexpr std::uint32_t kWalkReturn = 0x101;
inline constexpr std::uint32_t kWalkPolya = 0x102;
inline constexpr std::uint32_t kLatticeInit = 0x201;
inline constexpr std::uint32_t kLatticeStep = 0x202;
inline constexpr std::uint32_t kLevyPath = 0x301;
inline constexpr std::uint32_t kLevySeries = 0x302;
inline constexpr std::uint32_t kFitNoise = 0x401;
} // namespace stream_tag

} // namespace granular
