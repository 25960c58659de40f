#pragma once

#include <cstdint>
#include <random>

namespace optomag {

using Engine = std::mt19937_64;

/// Independent random streams derived from one run seed. Each consumer owns
/// its stream so that enabling e.g. camera noise never shifts shutter draws.
enum class Stream : std::uint64_t {
    Sites = 1,
    Trainer = 2,
    Shutter = 3,
    Noise = 4,
    Render = 5, ///< full-frame dumps only
};

inline Engine make_stream(std::uint64_t seed, Stream stream) {
    const auto id = static_cast<std::uint64_t>(stream);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(id), static_cast<std::uint32_t>(id >> 32),
                      0x6f70746fU};
    return Engine(seq);
}

/// Uniform draw in [0, 1) from the top 53 bits; never returns 1.
inline double uniform01(Engine& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

} // namespace optomag
