#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace poreuq {

// SplitMix64 finaliser; bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Counter-based generator: every draw is a pure function of (seed, stream,
// index, slot). Parallel loops can therefore draw at any schedule and still
// reproduce the serial sequence bit for bit.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
        : key_(mix64(mix64(seed) ^ (0x9e3779b97f4a7c15ull * (stream + 1)))) {}

    std::uint64_t bits(std::uint64_t index, std::uint64_t slot = 0) const noexcept {
        return mix64(key_ ^ mix64(index ^ mix64(slot + 0x6a09e667f3bcc909ull)));
    }

    // Uniform on [0, 1), 53-bit resolution.
    double u01(std::uint64_t index, std::uint64_t slot = 0) const noexcept {
        return static_cast<double>(bits(index, slot) >> 11) * 0x1.0p-53;
    }

    double uniform(std::uint64_t index, std::uint64_t slot, double lo, double hi) const noexcept {
        return lo + (hi - lo) * u01(index, slot);
    }

    // Standard normal, Box-Muller on slots (2k, 2k+1) of the same index.
    double normal(std::uint64_t index, std::uint64_t slot = 0) const noexcept {
        // (bits + 0.5) * 2^-64 keeps u1 strictly inside (0, 1).
        const double u1 = (static_cast<double>(bits(index, 2 * slot)) + 0.5) * 0x1.0p-64;
        const double u2 = u01(index, 2 * slot + 1);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    std::uint64_t key() const noexcept { return key_; }

private:
    std::uint64_t key_;
};

// Stream tags, one per independent consumer of a run seed.
namespace streams {
inline constexpr std::uint64_t sample = 1;     // prior sampling (z draws)
inline constexpr std::uint64_t train = 2;      // surrogate training designs
inline constexpr std::uint64_t holdout = 3;    // surrogate held-out designs
inline constexpr std::uint64_t kde = 4;        // density sample sets
inline constexpr std::uint64_t mc_eval = 5;    // sensitivity MC evaluation points
inline constexpr std::uint64_t permute = 6;    // two-sample permutation replicates
inline constexpr std::uint64_t compare = 7;    // two-sample QoI draws
}  // namespace streams

}  // namespace poreuq
