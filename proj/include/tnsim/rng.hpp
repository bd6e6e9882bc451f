#pragma once

#include <cmath>
#include <cstdint>

#include "tnsim/field.hpp"

namespace tnsim {

namespace detail {

inline constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline double to_unit_open(std::uint64_t h) {
    // (0,1), never exactly 0 or 1
    return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace detail

/// Counter-based splittable stream: one stream per trajectory. Every variate
/// is a pure function of (master seed, sample, step, ordinal, lane), so
/// results are bit-identical regardless of scheduling or thread count.
struct RngStream {
    std::uint64_t master_seed = 0;
    std::uint64_t sample = 0;
};

/// One standard normal for the given counter coordinates (Box-Muller on two
/// hashed uniforms). lane 0 holds the primary per-step increments; nonzero
/// lanes are reserved for bridge refinements within a step.
inline double normal_draw(const RngStream& s, std::uint64_t step, std::uint64_t ordinal,
                          std::uint64_t lane = 0) {
    using detail::mix64;
    std::uint64_t h = s.master_seed;
    h = mix64(h ^ mix64(s.sample + 0x6A09E667F3BCC909ULL));
    h = mix64(h ^ mix64(step + 0xBB67AE8584CAA73BULL));
    h = mix64(h ^ mix64(ordinal + 0x3C6EF372FE94F82BULL));
    h = mix64(h ^ mix64(lane + 0xA54FF53A5F1D36F1ULL));
    const std::uint64_t h2 = mix64(h ^ 0x510E527FADE682D1ULL);
    const double u1 = detail::to_unit_open(h);
    const double u2 = detail::to_unit_open(h2);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

}  // namespace tnsim
