#pragma once

#include <cstdint>
#include <random>

#include "cmlab/common.hpp"

namespace cmlab {

inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Counter-derived child seed: identical on every platform and schedule.
inline uint64_t derive_seed(uint64_t master, uint64_t a, uint64_t b = 0, uint64_t c = 0) {
    uint64_t s = master;
    uint64_t h = splitmix64(s);
    s ^= a + 0x9e3779b97f4a7c15ULL;
    h ^= splitmix64(s);
    s ^= b + 0xbf58476d1ce4e5b9ULL;
    h ^= splitmix64(s);
    s ^= c + 0x94d049bb133111ebULL;
    h ^= splitmix64(s);
    return h;
}

// mt19937_64 core (bit-exact per the standard) with a Box-Muller gaussian,
// so streams do not depend on the library's unspecified normal_distribution.
class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t next_u64() { return gen_(); }

    double uniform() {  // [0, 1)
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 1.0 - uniform();  // (0, 1]
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    uint8_t bit() { return static_cast<uint8_t>(gen_() & 1u); }

    Bits bits(size_t n) {
        Bits out(n);
        for (size_t i = 0; i < n; ++i) out[i] = bit();
        return out;
    }

    // Unbiased integer in [0, n).
    uint64_t below(uint64_t n) {
        uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t v;
        do {
            v = gen_();
        } while (v >= limit);
        return v % n;
    }

private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace cmlab
