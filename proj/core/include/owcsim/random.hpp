#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace owcsim {

namespace detail {
__extension__ using uint128 = unsigned __int128;
}

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/**
 * xoshiro256** engine with portable distribution helpers.
 *
 * Every draw used by the simulator goes through the helpers below rather
 * than the <random> distributions, whose algorithms are left unspecified by
 * the standard. That keeps a seed's output identical across toolchains.
 */
class Rng
{
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed) noexcept
    {
        std::uint64_t s = seed;
        for (auto& word : state_) {
            s += 0x9E3779B97F4A7C15ULL;
            word = mix64(s);
        }
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept
    {
        return std::numeric_limits<result_type>::max();
    }

    result_type operator()() noexcept
    {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() noexcept
    {
        return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, bound). Lemire's multiply-and-reject method.
    std::uint64_t below(std::uint64_t bound) noexcept
    {
        detail::uint128 m = static_cast<detail::uint128>((*this)()) * bound;
        auto low = static_cast<std::uint64_t>(m);
        if (low < bound) {
            const std::uint64_t threshold = (0 - bound) % bound;
            while (low < threshold) {
                m = static_cast<detail::uint128>((*this)()) * bound;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    /// True with probability p. p <= 0 never fires, p >= 1 always fires.
    bool bernoulli(double p) noexcept { return uniform() < p; }

    /// Standard normal variate (Box-Muller, one output per call).
    double normal() noexcept
    {
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1))
               * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept
    {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4];
};

/**
 * Derives independent per-frame streams from a master seed.
 *
 * The stream for frame f depends only on (master, f, substream), so frames
 * can be simulated in any order or partition and reproduce bit-for-bit.
 * Substream 0 drives the protocol draws; other substreams are reserved for
 * side channels such as preamble noise.
 */
struct SeedPolicy
{
    std::uint64_t master = 1;

    std::uint64_t frame_seed(std::uint64_t frame,
                             std::uint64_t substream = 0) const noexcept
    {
        std::uint64_t s = mix64(master ^ 0x6A09E667F3BCC908ULL);
        s = mix64(s + (frame + 1) * 0x9E3779B97F4A7C15ULL);
        return mix64(s ^ (substream * 0xD1B54A32D192ED03ULL));
    }

    Rng frame_stream(std::uint64_t frame,
                     std::uint64_t substream = 0) const noexcept
    {
        return Rng(frame_seed(frame, substream));
    }
};

}  // namespace owcsim
