#pragma once

#include <cmath>
#include <cstdint>

namespace besov {

// Deterministic, implementation-independent random numbers.
//
// The generator is xoshiro256++ seeded through splitmix64; the variate
// transforms below are written out explicitly so that streams are
// bit-reproducible across compilers and standard libraries (the std::
// distributions make no such guarantee).  Streams for experiment tasks are
// derived from a master seed and a few stream ids, so (eps, replicate)
// pairs can run in any order or in parallel and still reproduce.

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Mixes a master seed with up to three stream ids into one 64-bit seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a = 0,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t s = master;
    std::uint64_t out = splitmix64(s);
    s ^= 0x517cc1b727220a95ULL + a;
    out ^= splitmix64(s);
    s ^= 0x2545f4914f6cdd1dULL + (b << 1);
    out ^= splitmix64(s);
    s ^= 0x9e3779b97f4a7c15ULL + (c << 2);
    out ^= splitmix64(s);
    return out;
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64(sm);
        has_cached_normal_ = false;
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform on (0,1); never returns 0 or 1 exactly.
    double uniform() {
        const std::uint64_t bits = next_u64() >> 11; // 53 bits
        return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller (deterministic pair caching).
    double normal() {
        if (has_cached_normal_) {
            has_cached_normal_ = false;
            return cached_normal_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        cached_normal_ = r * std::sin(a);
        has_cached_normal_ = true;
        return r * std::cos(a);
    }

    // Standard exponential, mean 1.
    double exponential() { return -std::log(uniform()); }

    // Standard Laplace (density exp(-|x|)/2), as a difference of two
    // independent standard exponentials.
    double laplace() {
        const double e1 = exponential();
        const double e2 = exponential();
        return e1 - e2;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4];
    double cached_normal_ = 0.0;
    bool has_cached_normal_;
};

} // namespace besov
