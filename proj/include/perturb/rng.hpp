// Seeded randomness for reproducible experiments.
//
// All distributions are implemented on top of the raw 64-bit stream so that
// results are identical across platforms and standard-library versions.
// Trial seeds are derived from (master_seed, index) pairs, never from worker
// identity, which keeps sweeps parallelism-independent.

#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace perturb {

// SplitMix64 step; used for seed derivation and engine warm-up.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return splitmix64(splitmix64(master) ^ splitmix64(index * 0x9e3779b97f4a7c15ULL + 1));
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(splitmix64(seed)) {}

    std::uint64_t next() { return eng_(); }

    // Uniform in [0,1) with 53 bits of precision.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) {
        if (p <= 0.0) return false;
        if (p >= 1.0) return true;
        return uniform01() < p;
    }

    // Uniform integer in [lo, hi] inclusive.
    int uniform_int(int lo, int hi) {
        if (lo > hi) throw std::invalid_argument("uniform_int: empty range");
        std::uint64_t span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo) + 1;
        // Rejection sampling for an unbiased draw.
        std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % span;
        std::uint64_t x;
        do { x = next(); } while (x >= limit);
        return lo + static_cast<int>(x % span);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
            int j = uniform_int(0, i);
            std::swap(v[static_cast<std::size_t>(i)], v[static_cast<std::size_t>(j)]);
        }
    }

    // Random permutation of [0, n).
    std::vector<int> permutation(int n) {
        std::vector<int> p(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = i;
        shuffle(p);
        return p;
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace perturb
