#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace tnodal {

/// SplitMix64 finaliser. Used as a stateless counter-based generator: output k of stream `key` is
/// mix(key ^ mix(k)), so any draw is addressable without shared generator state.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Uniform in (0, 1] with 53 random bits.
inline double counter_uniform(std::uint64_t key, std::uint64_t counter) {
    const std::uint64_t bits = mix64(key ^ mix64(counter));
    return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

/// Standard normal draw number `index` of stream `key` (Box-Muller over counter pairs).
inline double counter_normal(std::uint64_t key, std::uint64_t index) {
    const std::uint64_t pair = index / 2;
    const double u1 = counter_uniform(key, 2 * pair);
    const double u2 = counter_uniform(key, 2 * pair + 1);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    return (index % 2 == 0) ? r * std::cos(a) : r * std::sin(a);
}

/// Seed of trial `index` in an experiment keyed by `base_seed`.
constexpr std::uint64_t trial_seed(std::uint64_t base_seed, std::uint64_t index) {
    return mix64(mix64(base_seed) + 0x632be59bd9b4e019ULL * (index + 1));
}

}  // namespace tnodal
