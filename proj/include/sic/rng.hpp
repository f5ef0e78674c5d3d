// rng.hpp
// Seeded random generator with a platform-independent bounded draw.
//
// std::uniform_int_distribution is implementation-defined, so reproducible
// runs across toolchains use this wrapper instead. Every stochastic routine
// in the library documents its draw sequence in terms of next_below().

#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace sic {

class SplitRng {
public:
    explicit SplitRng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform integer in [0, n), unbiased via rejection sampling.
    std::uint64_t next_below(std::uint64_t n) {
        // Largest multiple of n that fits in 64 bits; draws at or above it
        // are rejected so the modulo is exact.
        const std::uint64_t limit = n * ((~std::uint64_t{0}) / n);
        std::uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return x % n;
    }

    /// Uniform double in [0, 1) with 53 bits of precision.
    double next_unit() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

private:
    std::mt19937_64 gen_;
};

/// First k entries of a partial Fisher-Yates shuffle of {0,...,n-1}, in draw
/// order. Consumes exactly k bounded draws from rng.
inline std::vector<int> sample_without_replacement(int n, int k, SplitRng& rng) {
    std::vector<int> idx(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
    for (int t = 0; t < k; ++t) {
        const int j = t + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n - t)));
        std::swap(idx[static_cast<std::size_t>(t)], idx[static_cast<std::size_t>(j)]);
    }
    idx.resize(static_cast<std::size_t>(k));
    return idx;
}

} // namespace sic
