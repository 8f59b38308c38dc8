#pragma once

#include <complex>
#include <cstdint>
#include <string>

namespace pretzel {

// All randomness in the project flows from a single user-supplied seed through
// splittable splitmix64 chains. Child generators are derived by hashing the
// parent seed with a task tag and an index, so every sampling task is
// reproducible in isolation and output is byte-identical across runs and
// platforms. std:: distributions are deliberately avoided (their algorithms
// are implementation-defined).
struct SplitMix64 {
    std::uint64_t state = 0;

    explicit SplitMix64(std::uint64_t seed = 0) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return next() % n; }

    std::complex<double> complex_in_box(double half_width) {
        double re = uniform(-half_width, half_width);
        double im = uniform(-half_width, half_width);
        return {re, im};
    }
};

inline std::uint64_t fnv1a64(const std::string& s, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t fnv1a64(std::uint64_t v, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (int i = 0; i < 8; ++i) {
        h ^= (v >> (8 * i)) & 0xff;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Child seed = hash(seed, tag, index); the canonical way to split streams.
inline SplitMix64 derive_rng(std::uint64_t seed, const std::string& tag, std::uint64_t index = 0) {
    std::uint64_t h = fnv1a64(seed);
    h = fnv1a64(tag, h);
    h = fnv1a64(index, h);
    return SplitMix64(h);
}

} // namespace pretzel
