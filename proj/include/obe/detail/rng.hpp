#pragma once

#include <cstdint>
#include <random>

namespace obe::detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Deterministic engine derived from (seed, stream) so independent consumers
/// of one user-facing seed do not share state.
inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
    return std::mt19937_64(splitmix64(splitmix64(seed) ^ stream));
}

/// Uniform draw strictly inside (0, 1); resamples the boundary values.
inline double open_unit_uniform(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    double u = dist(rng);
    while (u <= 0.0 || u >= 1.0) u = dist(rng);
    return u;
}

}  // namespace obe::detail
