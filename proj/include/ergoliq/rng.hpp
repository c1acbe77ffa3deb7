#pragma once

#include <cstdint>
#include <random>

namespace ergoliq {

/// Random stream type used throughout. Every simulation takes one explicitly.
using Rng = std::mt19937_64;

/// SplitMix64 finalizer (Steele, Lea & Flood). Bijective on 64-bit words.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Child seed number `index` of `master`.
///
/// Path i of an ensemble seeded with m uses derive_seed(m, i); within a path
/// derive_seed(path_seed, 0) drives the jump stream and derive_seed(path_seed, 1)
/// the Brownian increments. Results therefore never depend on how paths are
/// scheduled across workers, and the jump arrivals of a path are shared by
/// every strategy, cash mode, and volatility run with the same seed.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
    return splitmix64(splitmix64(master) ^ (0xD1B54A32D192ED03ull * (index + 1)));
}

inline Rng make_rng(std::uint64_t seed) { return Rng{seed}; }

} // namespace ergoliq
