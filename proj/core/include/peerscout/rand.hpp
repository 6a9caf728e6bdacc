#pragma once

#include <cstdint>

namespace peerscout {

// splitmix64 mixing step; fixed algorithm so seeds derive identically on
// every platform.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Unbiased bounded draw via rejection sampling.
template <typename Rng>
std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
    const std::uint64_t limit = bound * (UINT64_MAX / bound);
    for (;;) {
        const std::uint64_t r = rng();
        if (r < limit) return r % bound;
    }
}

}  // namespace peerscout
