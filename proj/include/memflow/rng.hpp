#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "memflow/errors.hpp"

namespace memflow {

// splitmix64 finalizer; used to derive well-separated child seeds from a
// master seed.  Fully specified arithmetic -> identical on every platform.
inline uint64_t splitmix64(uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline uint64_t derive_seed(uint64_t master, uint64_t index) {
    // Mix the index in before finalizing so consecutive indices give
    // statistically independent streams.
    return splitmix64(master ^ (0xD1B54A32D192ED03ULL * (index + 1)));
}

// Deterministic random stream: std::mt19937_64 core (bit-exact across
// platforms by the standard) with hand-rolled output transforms, because
// std::uniform_real_distribution / normal_distribution are implementation
// defined and would break cross-run reproducibility guarantees.
class RngStream {
public:
    explicit RngStream(uint64_t seed) : eng_(seed) {}

    uint64_t next_u64() { return eng_(); }

    // Uniform on [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // Uniform on [lo, hi).  A degenerate box [c, c] returns c exactly.
    double uniform(double lo, double hi) { return lo + uniform01() * (hi - lo); }

    // Uniform integer in [0, n).  The scaled-double construction has bias
    // below n * 2^-53, irrelevant at the sizes used here, and is exactly
    // reproducible everywhere.
    uint64_t uniform_index(uint64_t n) {
        require(n >= 1, "uniform_index: n must be >= 1");
        uint64_t k = static_cast<uint64_t>(uniform01() * static_cast<double>(n));
        return k < n ? k : n - 1;
    }

    // Standard normal via Box-Muller; caches the second variate.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        // u1 in (0, 1] so the logarithm is finite.
        double u1 = 1.0 - uniform01();
        double u2 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;  // 2*pi
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

inline RngStream derive_stream(uint64_t master, uint64_t index) {
    return RngStream(derive_seed(master, index));
}

}  // namespace memflow
