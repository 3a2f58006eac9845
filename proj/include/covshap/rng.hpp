#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace covshap {

// Deterministic stream derivation: every parallel work item owns a generator
// seeded from (root seed, tags...), so results do not depend on scheduling.

inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline uint64_t mix_seed(std::initializer_list<uint64_t> parts) {
    uint64_t state = 0x2545f4914f6cdd1dULL;
    uint64_t h = 0;
    for (uint64_t p : parts) {
        state ^= p + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        h = splitmix64(state);
    }
    return h;
}

inline std::mt19937_64 make_stream(uint64_t seed, uint64_t a = 0, uint64_t b = 0,
                                   uint64_t c = 0) {
    return std::mt19937_64(mix_seed({seed, a, b, c}));
}

// Uniform on [0,1) with 53-bit resolution.
inline double runif(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

// Standard normal by the polar method. Stateless across calls (the second
// variate is discarded) so draw counts are reproducible.
inline double rnorm(std::mt19937_64& gen) {
    double u, v, s;
    do {
        u = 2.0 * runif(gen) - 1.0;
        v = 2.0 * runif(gen) - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    return u * std::sqrt(-2.0 * std::log(s) / s);
}

}  // namespace covshap
