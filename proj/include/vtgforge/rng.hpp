#pragma once

// Seeded randomness helpers. std::mt19937_64 output is specified
// bit-exactly by the standard; the distribution helpers here avoid
// std::uniform_*_distribution, whose results vary across standard
// library implementations, so seeded runs are reproducible everywhere.

#include <cstdint>
#include <random>
#include <string_view>

namespace vtgforge {

using Rng = std::mt19937_64;

// 64-bit FNV-1a. Used for stable content digests and seed derivation.
inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    // splitmix64 finalizer over the xor of the two inputs
    std::uint64_t z = (a ^ (b + 0x9e3779b97f4a7c15ull)) + 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Uniform double in [0, 1) with 53 bits of precision.
inline double uniform_unit(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_range(Rng& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform_unit(rng);
}

// Uniform integer in [0, n). n must be positive; modulo bias is
// negligible for the small n used here.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t n) {
    return rng() % n;
}

}  // namespace vtgforge
