#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace quorum {

// std::mt19937_64 output is fully specified by the standard, but the standard
// distributions are not. These hand-rolled transforms keep every draw
// bit-identical across standard libraries and platforms.
using Rng = std::mt19937_64;

// Uniform in [0, 1) with 53 bits of precision.
inline double uniform_double(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform in [lo, hi).
inline double uniform_double(Rng& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform_double(rng);
}

// Uniform integer in [0, n) by rejection; n must be > 0.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
    const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % n;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % n;
}

// Standard normal via Box-Muller. Uses two uniforms per draw and discards the
// sine branch so there is no hidden cache state.
inline double normal_double(Rng& rng) {
    double u1omin;
    do {
        u1omin = uniform_double(rng);
    } while (u1omin <= 0.0);
    const double u2 = uniform_double(rng);
    return std::sqrt(-2.0 * std::log(u1omin)) * std::cos(6.283185307179586476925286766559 * u2);
}

inline double normal_double(Rng& rng, double mean, double stddev) {
    return mean + stddev * normal_double(rng);
}

// splitmix64 finalizer; combines a base seed with a stream tag so derived
// streams never overlap.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace quorum
