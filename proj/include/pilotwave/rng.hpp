#pragma once

#include <cstdint>
#include <random>

namespace pilotwave {

// splitmix64 finaliser; decorrelates neighbouring stream indices.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Independent generator for work item `index` under `master_seed`.
/// Results never depend on which thread runs which item.
inline std::mt19937_64 stream_rng(std::uint64_t master_seed, std::uint64_t index) {
    return std::mt19937_64{mix64(master_seed ^ mix64(index + 0x632be59bd9b4e019ULL))};
}

/// Uniform double in [0, 1) with 53 random bits. Avoids the
/// implementation-defined std::uniform_real_distribution.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace pilotwave
