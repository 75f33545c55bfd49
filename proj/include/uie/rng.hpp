#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace uie {

// splitmix64 step; stateless building block for hashing and stream derivation.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline uint64_t hash_combine(uint64_t a, uint64_t b) {
    return splitmix64(a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2)));
}

inline uint64_t hash_bytes(std::string_view s, uint64_t seed = 0) {
    uint64_t h = 1469598103934665603ULL ^ seed;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return splitmix64(h);
}

// Derive an independent named stream from a run seed. All randomness in the
// pipeline flows from one seed through these streams so each stage is
// reproducible in isolation.
inline uint64_t derive_seed(uint64_t seed, std::string_view stream) {
    return hash_combine(splitmix64(seed), hash_bytes(stream));
}

// Small deterministic PRNG (xoshiro-free, just iterated splitmix64). The
// standard distributions are implementation-defined, so the helpers below are
// hand-rolled to keep outputs identical everywhere.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(splitmix64(seed ^ 0x853c49e6748fea9bULL)) {}

    uint64_t next() {
        state_ = splitmix64(state_);
        return state_;
    }

    // uniform in [0, n); n > 0
    size_t uniform_index(size_t n) { return static_cast<size_t>(next() % n); }

    // uniform double in [0, 1)
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // uniform double in [lo, hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    bool bernoulli(double p) { return uniform01() < p; }

    // index sampled proportionally to nonnegative weights
    size_t weighted_index(std::span<const double> weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        double u = uniform01() * total;
        double acc = 0.0;
        for (size_t i = 0; i + 1 < weights.size(); ++i) {
            acc += weights[i];
            if (u < acc) return i;
        }
        return weights.empty() ? 0 : weights.size() - 1;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = uniform_index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    uint64_t state_;
};

}  // namespace uie
