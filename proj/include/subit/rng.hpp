#pragma once

#include <cmath>
#include <cstdint>

namespace subit {

// SplitMix64, used to derive independent substream seeds from one master seed.
inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// xoshiro256** with explicit, platform-independent sampling helpers.
// std::mt19937 + std distributions are avoided so that generated datasets
// are bit-identical everywhere.
class Rng {
public:
    explicit Rng(uint64_t seed = 0) { reseed(seed); }

    void reseed(uint64_t seed) {
        uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
        has_gauss_ = false;
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Unbiased integer in [0, n) via rejection.
    uint64_t next_below(uint64_t n) {
        if (n == 0) return 0;
        const uint64_t threshold = (0 - n) % n;
        for (;;) {
            uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    int next_int(int lo, int hi) { // inclusive range
        return lo + static_cast<int>(next_below(static_cast<uint64_t>(hi - lo + 1)));
    }

    double next_double() { // [0,1)
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    bool next_bool() { return (next_u64() >> 63) != 0; }

    // Box-Muller; cached second value keeps the stream deterministic.
    double gaussian() {
        if (has_gauss_) {
            has_gauss_ = false;
            return gauss_;
        }
        double u1 = 0.0;
        do {
            u1 = next_double();
        } while (u1 <= 1e-313);
        const double u2 = next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925286766559 * u2;
        gauss_ = r * std::sin(theta);
        has_gauss_ = true;
        return r * std::cos(theta);
    }

    // Derived generator for substream `index`; independent of draws made here.
    Rng spawn(uint64_t index) const {
        uint64_t sm = s_[0] ^ (0x5851f42d4c957f2dull * (index + 1));
        return Rng(splitmix64(sm));
    }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    uint64_t s_[4]{};
    double gauss_ = 0.0;
    bool has_gauss_ = false;
};

} // namespace subit
