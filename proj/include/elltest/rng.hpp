#pragma once

#include <cstdint>
#include <random>

namespace elltest {

/// Engine used by every sampler. Always passed explicitly; nothing in the
/// library owns a global generator.
using Rng = std::mt19937_64;

/// SplitMix64 finalizer. Bijective on 64-bit words.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Counter-based substream seed: a pure function of (seed, stream), so that
/// trial t draws the same numbers no matter which thread runs it or when.
[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t seed,
                                                  std::uint64_t stream) noexcept {
    return mix64(mix64(seed) ^ mix64(stream ^ 0xD1B54A32D192ED03ULL));
}

[[nodiscard]] inline Rng make_stream_rng(std::uint64_t seed, std::uint64_t stream) {
    return Rng(derive_seed(seed, stream));
}

}  // namespace elltest
