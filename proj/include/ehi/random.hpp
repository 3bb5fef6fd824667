#pragma once

#include <cstdint>
#include <limits>

namespace ehi {

/// SplitMix64 (Steele, Lea & Flood). Every random stream in the library comes
/// from this generator so results are identical across standard libraries.
class SplitMix64 {
public:
    using result_type = std::uint64_t;

    explicit SplitMix64(std::uint64_t seed = 0) noexcept : state_(seed) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, bound) by rejection; bound must be > 0.
    std::uint64_t bounded(std::uint64_t bound) noexcept {
        const std::uint64_t limit = max() - max() % bound;
        std::uint64_t x;
        do {
            x = (*this)();
        } while (x >= limit);
        return x % bound;
    }

    /// Independent child stream; `salt` distinguishes siblings.
    SplitMix64 fork(std::uint64_t salt) noexcept {
        SplitMix64 mixer(state_ ^ (salt * 0xD1B54A32D192ED03ULL));
        return SplitMix64(mixer());
    }

private:
    std::uint64_t state_;
};

} // namespace ehi
