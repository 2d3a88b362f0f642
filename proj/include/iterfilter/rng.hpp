#pragma once

#include <cstdint>

namespace iterfilter {

/// SplitMix64 finalizer; used for seeding and stream derivation.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// xoshiro256** generator with explicit, portable sampling routines.
///
/// All distributions are implemented here rather than through <random>
/// distribution objects, whose output is implementation-defined. Given the
/// same seed, every build produces the same stream.
class Rng {
public:
    explicit Rng(std::uint64_t seed) noexcept;

    /// Independent stream for (seed, stream_id), e.g. one per point or step.
    static Rng stream(std::uint64_t seed, std::uint64_t stream_id) noexcept;

    std::uint64_t next() noexcept;

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() noexcept;
    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) noexcept;
    /// Uniform integer in [0, n); n must be > 0.
    std::uint64_t index(std::uint64_t n) noexcept;
    /// Standard normal via Box-Muller (cosine branch only).
    double normal() noexcept;

private:
    std::uint64_t s_[4];
};

} // namespace iterfilter
