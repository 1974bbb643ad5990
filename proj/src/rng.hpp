#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace cuphaptics {

// All randomness goes through std::mt19937_64, whose output sequence is fixed
// by the standard. The std distributions are not, so the conversions below
// are done by hand to keep generated data identical across toolchains.
using Rng = std::mt19937_64;

/// Substream for item `index` of a stream seeded with `seed`.
inline Rng substream(std::uint64_t seed, std::uint64_t index) { return Rng(seed ^ index); }

/// SplitMix64 finalizer; used to derive independent seeds from (seed, tag).
std::uint64_t mix_seed(std::uint64_t x);

/// Uniform double in [0, 1) with 53 random bits.
double uniform01(Rng& rng);

/// Uniform double in [lo, hi).
double uniform(Rng& rng, double lo, double hi);

/// Standard normal variate (Box-Muller, one draw per call).
double standard_normal(Rng& rng);

/// Uniform integer in [0, bound) by rejection; bound > 0.
std::uint64_t uniform_index(Rng& rng, std::uint64_t bound);

/// Fisher-Yates shuffle.
template <typename T>
void shuffle(std::span<T> items, Rng& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(uniform_index(rng, i));
        std::swap(items[i - 1], items[j]);
    }
}

}  // namespace cuphaptics
