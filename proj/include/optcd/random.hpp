#pragma once

#include <cstdint>
#include <random>

namespace optcd {

using Engine = std::mt19937_64;

// SplitMix64 finalizer; decorrelates nearby seeds before they reach the engine.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Independent stream for replication `index` under `master`. `tag` separates
// unrelated uses of the same (master, index) pair, e.g. pilot runs.
inline Engine substream(std::uint64_t master, std::uint64_t index, std::uint64_t tag = 0) {
    return Engine(mix64(master ^ mix64(index ^ mix64(tag))));
}

}  // namespace optcd
