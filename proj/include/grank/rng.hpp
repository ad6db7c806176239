#pragma once

#include <cstdint>
#include <random>

namespace grank {

// The seeding scheme is part of the output-stability contract: stream k of a
// 64-bit seed is the k-th output of splitmix64 started at that seed, and the
// per-stream engine is std::mt19937_64 (whose sequence the standard pins).

inline constexpr std::uint64_t kSplitMixGamma = 0x9e3779b97f4a7c15ull;

inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) {
    return mix64(seed + (index + 1) * kSplitMixGamma);
}

/// Uniform double in [0, 1) from the top 53 bits of one engine draw.
/// Bit-stable everywhere, unlike std::uniform_real_distribution.
inline double uniform01(std::mt19937_64& engine) {
    return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

} // namespace grank
