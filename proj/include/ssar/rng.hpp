#pragma once

#include <cstdint>
#include <limits>

namespace ssar {

/**
 * Counter-based SplitMix64 generator.
 *
 * Output k of a stream with key K is mix(K + k * 0x9E3779B97F4A7C15), so any
 * position of any stream can be computed without touching the others. Streams
 * for replicates, backtest origins and estimation stages are obtained with
 * derive_seed(), which hashes (parent seed, stream index) into a fresh key.
 *
 * Satisfies UniformRandomBitGenerator and is usable with Boost.Random
 * distributions.
 */
class SplitMix64 {
public:
    using result_type = std::uint64_t;

    static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

    explicit SplitMix64(std::uint64_t key = 0, std::uint64_t counter = 0) noexcept
        : key_(key), counter_(counter) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        ++counter_;
        return mix(key_ + counter_ * kGolden);
    }

    void discard(std::uint64_t n) noexcept { counter_ += n; }

    std::uint64_t key() const noexcept { return key_; }
    std::uint64_t counter() const noexcept { return counter_; }

    static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_;
};

/// Key of child stream `stream` under `seed`. Distinct indices give decorrelated keys.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    return SplitMix64::mix(seed ^ SplitMix64::mix(stream + SplitMix64::kGolden));
}

} // namespace ssar
