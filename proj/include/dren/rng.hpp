#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "dren/matrix.hpp"

namespace dren {

/// Deterministic 64-bit generator used everywhere randomness is needed.
///
/// The algorithm is xoshiro256** (Blackman & Vigna), with the four state
/// words seeded from successive outputs of splitmix64. Both are fixed-point
/// integer recurrences, so a given seed yields the same stream on every
/// platform. Floating-point draws are derived from the integer stream with
/// explicit arithmetic (no std::uniform_real_distribution, whose output is
/// implementation-defined).
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) {
        // splitmix64: increment 0x9E3779B97F4A7C15, mixers 0xBF58476D1CE4E5B9
        // and 0x94D049BB133111EB.
        std::uint64_t z = seed;
        for (auto& word : state_) {
            z += 0x9E3779B97F4A7C15ULL;
            std::uint64_t t = z;
            t = (t ^ (t >> 30)) * 0xBF58476D1CE4E5B9ULL;
            t = (t ^ (t >> 27)) * 0x94D049BB133111EBULL;
            word = t ^ (t >> 31);
        }
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1), 53 bits of precision.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform01();
    }

    /// Standard normal draw via Box-Muller; consumes two integer draws.
    double normal() {
        // u1 in (0, 1] keeps the log argument positive.
        const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
        const double u2 = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Integer in [0, n). Modulo mapping; the bias is negligible for the
    /// index ranges used here and keeps the draw count fixed.
    std::uint64_t below(std::uint64_t n) {
        return next_u64() % n;
    }

    /// Fisher-Yates shuffle driven by this stream.
    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

    Matrix normal_matrix(std::size_t rows, std::size_t cols, double stddev) {
        Matrix m(rows, cols);
        for (double& v : m.data()) v = stddev * normal();
        return m;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> state_{};
};

} // namespace dren
