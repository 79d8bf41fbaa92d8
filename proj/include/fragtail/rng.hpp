#pragma once

#include <cmath>
#include <cstdint>

namespace fragtail {

inline constexpr std::uint64_t golden_gamma = 0x9E3779B97F4A7C15ULL;

/// SplitMix64 output finalizer.
constexpr std::uint64_t mix64(std::uint64_t z)
{
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// seed_i = mix64(mix64(base) + golden_gamma·(i + 1)), arithmetic mod 2^64.
/// Used both for replicate seeds and for child keys in a cascade.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index)
{
    return mix64(mix64(base) + golden_gamma * (index + 1));
}

class SplitMix64 {
public:
    using result_type = std::uint64_t;

    explicit constexpr SplitMix64(std::uint64_t seed) : state_(seed) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type(0); }

    constexpr result_type operator()()
    {
        state_ += golden_gamma;
        return mix64(state_);
    }

    /// (⌊x/2^11⌋ + 1/2)·2^-53, never 0 or 1.
    double uniform() { return (double((*this)() >> 11) + 0.5) * 0x1p-53; }

    /// Inverse transform, -log(u)/rate.
    double exponential(double rate) { return -std::log(uniform()) / rate; }

private:
    std::uint64_t state_;
};

} // namespace fragtail
