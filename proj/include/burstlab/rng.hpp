#pragma once

// Deterministic, platform-portable randomness.
//
// std::mt19937_64 output is fully specified by the standard, but the
// std::*_distribution adapters are not. Every draw here goes through our own
// uniform/categorical code so identical seeds give identical streams on every
// platform and standard library.

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "burstlab/error.hpp"

namespace burstlab {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Stream-splitting rule: the generator for item `index` under a base seed is
// Rng(substream_seed(base_seed, index)). Used for per-document generation and
// per-class shuffles so documents can be processed in any order or in
// parallel without changing results.
inline std::uint64_t substream_seed(std::uint64_t base_seed, std::uint64_t index) {
    return splitmix64(base_seed ^ splitmix64(index + 1));
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1), 53 bits of precision.
    double next_double() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n) via rejection, no modulo bias.
    std::uint64_t next_below(std::uint64_t n) {
        if (n == 0) throw UsageError("next_below: n must be positive");
        const std::uint64_t rem = std::numeric_limits<std::uint64_t>::max() % n;
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - rem;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x > limit);
        return x % n;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

// Draws an index from non-negative weights; `total` must be their sum (> 0).
// Walk order is the vector order, so results are reproducible.
inline std::size_t sample_index(std::span<const double> weights, double total, Rng& rng) {
    const double u = rng.next_double() * total;
    double acc = 0.0;
    std::size_t last_positive = weights.size();
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] <= 0.0) continue;
        acc += weights[i];
        last_positive = i;
        if (u < acc) return i;
    }
    if (last_positive == weights.size()) throw UsageError("sample_index: no positive weight");
    return last_positive;  // float round-off at the top end
}

}  // namespace burstlab
