/**
 * @file random.hpp
 * @brief Counter-based random stream: output i of stream s under seed k is a
 *        pure function mix(key(k, s) + i * golden), so each Monte-Carlo path owns
 *        an independent, schedule-free substream.
 */
#pragma once

#include <cstdint>
#include <span>

namespace jumpspec {

class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept : key_(mix(seed ^ mix(stream + kGolden))) {}

    std::uint64_t next() noexcept { return mix(key_ + (++counter_) * kGolden); }

    /// Uniform on the open interval (0, 1).
    double uniform() noexcept { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

    std::uint64_t counter() const noexcept { return counter_; }

private:
    static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

    // splitmix64 finalizer
    static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

/// Neumaier-compensated sum; the result does not depend on how the input was produced.
inline double compensated_sum(std::span<const double> values) noexcept {
    double sum = 0.0;
    double carry = 0.0;
    for (double v : values) {
        const double t = sum + v;
        if ((sum >= 0 ? sum : -sum) >= (v >= 0 ? v : -v))
            carry += (sum - t) + v;
        else
            carry += (v - t) + sum;
        sum = t;
    }
    return sum + carry;
}

}  // namespace jumpspec
