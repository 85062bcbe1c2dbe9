#pragma once

#include <cmath>
#include <cstdint>

namespace homog {

// Counter-based randomness. Every random quantity is a pure function of
// (master seed, stream tag, entity coordinates), so sampled environments do
// not depend on iteration order, thread count, or box traversal. Lattice bond
// variables keyed by absolute site coordinates are reproduced identically in
// any box that contains the site, which is what makes pinned-ladder
// subsampling possible.

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Collapse a key tuple into a single 64-bit stream key.
inline uint64_t hash_key(uint64_t a) { return splitmix64(a); }
inline uint64_t hash_key(uint64_t a, uint64_t b) { return splitmix64(splitmix64(a) ^ (b + 0x9E3779B97F4A7C15ull)); }
inline uint64_t hash_key(uint64_t a, uint64_t b, uint64_t c) { return hash_key(hash_key(a, b), c); }
inline uint64_t hash_key(uint64_t a, uint64_t b, uint64_t c, uint64_t d) { return hash_key(hash_key(a, b, c), d); }
inline uint64_t hash_key(uint64_t a, uint64_t b, uint64_t c, uint64_t d, uint64_t e) {
    return hash_key(hash_key(a, b, c, d), e);
}

// Stream tags. Values are part of the on-disk reproducibility contract:
// changing them changes every sampled environment.
enum : uint64_t {
    TAG_BOND = 1,       // lattice bond variables, keyed by site + direction
    TAG_MARK = 2,       // site marks
    TAG_COUNT = 3,      // Poisson atom count
    TAG_POSITION = 4,   // continuum atom positions
    TAG_ENV = 5,        // per-(eps,replica) environment sub-seed
    TAG_TEST = 900      // scratch streams in tests
};

/// Deterministic sequence of draws addressed by a fixed key.
class Stream {
public:
    explicit Stream(uint64_t key) : key_(key), n_(0) {}

    uint64_t next_u64() { return splitmix64(key_ + 0xA0761D6478BD642Full * (++n_)); }

    /// Uniform in [0,1), 53-bit resolution.
    double next_u01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_u01(); }

    /// Standard normal via Box-Muller; draws two uniforms per call.
    double next_normal() {
        double u1 = next_u01();
        double u2 = next_u01();
        while (u1 <= 0.0) u1 = next_u01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    /// Poisson count. Inversion for small means, normal-tail-safe PTRS-free
    /// fallback via sum of smaller Poissons for large means (exact in law).
    long long next_poisson(double mean) {
        if (!(mean >= 0.0)) return 0;
        long long total = 0;
        // Split so inversion never multiplies below double underflow.
        while (mean > 500.0) {
            total += poisson_inversion(500.0);
            mean -= 500.0;
        }
        return total + poisson_inversion(mean);
    }

private:
    long long poisson_inversion(double mean) {
        if (mean <= 0.0) return 0;
        const double u = next_u01();
        double p = std::exp(-mean);
        double cdf = p;
        long long k = 0;
        while (u > cdf && k < 100000) {
            ++k;
            p *= mean / static_cast<double>(k);
            cdf += p;
        }
        return k;
    }

    uint64_t key_;
    uint64_t n_;
};

}  // namespace homog
