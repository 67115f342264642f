#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>
#include <vector>

namespace glove {

// Deterministic RNG. splitmix64 core with hand-rolled distributions so that
// streams are bit-identical across compilers and standard libraries (libstdc++
// and libc++ disagree on distribution internals, and reproducibility of
// training runs is part of the contract here).
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // [0, 1), 53-bit resolution.
    double uniform01() { return double(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Inclusive range via Lemire's multiply-shift reduction.
    uint64_t below(uint64_t bound) {
        __uint128_t m = __uint128_t(next_u64()) * bound;
        return uint64_t(m >> 64);
    }

    int uniform_int(int lo, int hi) {  // [lo, hi]
        return lo + int(below(uint64_t(hi - lo + 1)));
    }

    // Box-Muller, second value cached.
    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        double u2 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    double gaussian(double mean, double stddev) { return mean + stddev * gaussian(); }

    template <typename T>
    void shuffle(std::vector<T>& v) {  // Fisher-Yates
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = below(i);
            std::swap(v[i - 1], v[j]);
        }
    }

    // Independent substream, e.g. one per cross-validation fold.
    Rng fork(uint64_t salt) {
        Rng r(state_ ^ (0x9e3779b97f4a7c15ULL * (salt + 1)));
        r.next_u64();
        return r;
    }

private:
    uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace glove
