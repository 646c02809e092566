#pragma once

#include <cstdint>
#include <random>

namespace sqtom {

using Rng = std::mt19937_64;

// Seed-stream tags: all randomness in a run derives from one master seed
// through derive_seed(master, stream, index).
namespace seed_stream {
inline constexpr std::uint64_t simulate = 1;  // index = measurement-setting ordinal
inline constexpr std::uint64_t chain = 2;     // index = chain ordinal
inline constexpr std::uint64_t greedy = 3;    // maximum-likelihood climb
}  // namespace seed_stream

// splitmix64 mix of (master, stream, index); well separated even for
// adjacent master seeds.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index = 0);

// Uniform on the open interval (0,1) with 53-bit resolution.
inline double uniform01(Rng& rng) {
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

// Standard normal deviate via the Box-Muller cosine branch: consumes exactly
// two uniforms per call, no caching, so the draw sequence is a pure function
// of the engine state and reproduces across platforms.
double draw_normal(Rng& rng);

}  // namespace sqtom
