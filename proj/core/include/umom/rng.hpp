#pragma once

#include <cstdint>

namespace umom {

// Stateless SplitMix64 avalanche. Used as the one-way mixing step everywhere
// a derived seed is needed, so that streams are a pure function of
// (seed, counter) and never of execution order.
constexpr std::uint64_t splitmix_avalanche(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Derive the seed of the i-th child stream of `seed`: the SplitMix64 output
// at position i of the stream rooted at `seed`. Additive golden-ratio
// stepping keeps the derived streams of adjacent seeds disjoint, which a
// plain xor of seed and counter does not.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t i) noexcept {
    return splitmix_avalanche(seed + 0x9E3779B97F4A7C15ULL * (i + 1));
}

// xoshiro256++ (Blackman/Vigna), state seeded through a SplitMix64 sequence.
class Engine {
public:
    using result_type = std::uint64_t;

    explicit Engine(std::uint64_t seed = 0) noexcept { reseed(seed); }

    void reseed(std::uint64_t seed) noexcept {
        std::uint64_t sm = seed;
        for (auto& word : state_) {
            sm += 0x9E3779B97F4A7C15ULL;
            word = splitmix_avalanche(sm);
        }
    }

    std::uint64_t next() noexcept {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    std::uint64_t operator()() noexcept { return next(); }

    // Uniform double in [0, 1), 53 random bits.
    double uniform01() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform double in (0, 1]; safe as a log() argument.
    double uniform01_open_left() noexcept { return 1.0 - uniform01(); }

    // Uniform integer in [0, n); Lemire's multiply-shift with rejection.
    std::uint64_t below(std::uint64_t n) noexcept {
        __uint128_t m = static_cast<__uint128_t>(next()) * n;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < n) {
            const std::uint64_t threshold = (0 - n) % n;
            while (lo < threshold) {
                m = static_cast<__uint128_t>(next()) * n;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    static constexpr std::uint64_t min() noexcept { return 0; }
    static constexpr std::uint64_t max() noexcept { return ~0ULL; }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4];
};

}  // namespace umom
