#pragma once

#include <cstdint>
#include <random>

namespace mipt {

// splitmix64, used to derive independent substream seeds from a master seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d4a2ca9da86cd9ULL;
    return x ^ (x >> 31);
}

// Seed for substream `stream` of master seed `master`. Streams with distinct
// indices are statistically independent; this is the split function used for
// trajectory-parallel ensembles.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    return splitmix64(master ^ splitmix64(stream + 0x2545f4914f6cdd1dULL));
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // uniform on [0, 1)
    double uniform() { return std::generate_canonical<double, 53>(gen_); }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n)
    std::uint64_t uniform_int(std::uint64_t n) {
        return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(gen_);
    }

    bool bernoulli(double p) { return uniform() < p; }

    double normal(double mean = 0.0, double stddev = 1.0) {
        return std::normal_distribution<double>(mean, stddev)(gen_);
    }

    std::mt19937_64& engine() { return gen_; }

private:
    std::mt19937_64 gen_;
};

// Rng for one trajectory of an ensemble.
inline Rng trajectory_rng(std::uint64_t master, std::uint64_t trajectory_index) {
    return Rng(derive_seed(master, trajectory_index));
}

}  // namespace mipt
