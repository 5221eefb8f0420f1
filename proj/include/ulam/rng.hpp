#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace ulam {

/// SplitMix64 finalizer. Used only to derive xoshiro state from (seed, stream).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/**
 * Reproducible random stream: xoshiro256** whose state is a pure function of
 * (seed, stream_id). Every variate generator below is written out explicitly
 * so that draws are bit-identical across standard library implementations.
 *
 * Child derivation:
 *   h  = mix64(seed ^ mix64(stream_id + 0x632be59bd9b4e019))
 *   s_i = mix64(h + (i+1) * 0x9e3779b97f4a7c15),  i = 0..3
 */
class RngStream {
public:
    using result_type = std::uint64_t;

    RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept
        : seed_(seed), stream_id_(stream_id) {
        const std::uint64_t h = mix64(seed ^ mix64(stream_id + 0x632be59bd9b4e019ULL));
        for (int i = 0; i < 4; ++i)
            s_[i] = mix64(h + static_cast<std::uint64_t>(i + 1) * 0x9e3779b97f4a7c15ULL);
        if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }

    result_type operator()() noexcept { return next(); }

    result_type next() noexcept {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform double in (0, 1] on the 2^-53 grid.
    double uniform() noexcept {
        return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
    }

    /// Uniform integer in [0, bound). Lemire's multiply-shift with rejection; exact.
    std::uint64_t below(std::uint64_t bound) noexcept {
        if (bound <= 1) return 0;
        unsigned __int128 m = static_cast<unsigned __int128>(next()) * bound;
        auto low = static_cast<std::uint64_t>(m);
        if (low < bound) {
            const std::uint64_t threshold = (0 - bound) % bound;
            while (low < threshold) {
                m = static_cast<unsigned __int128>(next()) * bound;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    bool bernoulli(double p) noexcept { return uniform() <= p; }

    /// Geometric on {0,1,2,...} with P(k) = (1-q) q^k, by inversion.
    std::uint64_t geometric0(double q) noexcept {
        if (q <= 0.0) return 0;
        const double g = std::floor(std::log(uniform()) / std::log(q));
        return static_cast<std::uint64_t>(g);
    }

    std::uint64_t poisson(double mean) noexcept {
        if (!(mean > 0.0)) return 0;
        return mean < 30.0 ? poisson_inversion(mean) : poisson_ptrs(mean);
    }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t poisson_inversion(double mean) noexcept {
        const double u = uniform();
        double p = std::exp(-mean);
        double cdf = p;
        std::uint64_t k = 0;
        while (u > cdf) {
            ++k;
            p *= mean / static_cast<double>(k);
            cdf += p;
            // cdf can stall just below 1 in floating point
            if (p < 1e-300 && static_cast<double>(k) > mean) break;
        }
        return k;
    }

    // Hormann's transformed rejection with squeeze (PTRS). Exact for mean >= 10.
    std::uint64_t poisson_ptrs(double mean) noexcept {
        const double slam = std::sqrt(mean);
        const double loglam = std::log(mean);
        const double b = 0.931 + 2.53 * slam;
        const double a = -0.059 + 0.02483 * b;
        const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
        const double vr = 0.9277 - 3.6224 / (b - 2.0);
        for (;;) {
            const double u = uniform() - 0.5;
            const double v = uniform();
            const double us = 0.5 - std::fabs(u);
            const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
            if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(k);
            if (k < 0.0 || (us < 0.013 && v > us)) continue;
            if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
                -mean + k * loglam - std::lgamma(k + 1.0))
                return static_cast<std::uint64_t>(k);
        }
    }

    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint64_t s_[4];
};

inline RngStream make_rng(std::uint64_t seed, std::uint64_t stream_id) {
    return RngStream(seed, stream_id);
}

}  // namespace ulam
