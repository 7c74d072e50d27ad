#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace gzsl {

// Deterministic PRNG used everywhere randomness is needed, so that a run is
// reproducible bit-for-bit from its seed.
//
// The generator is pinned exactly:
//   state0 = splitmix64(seed)          (one round; 0 is remapped to the
//                                       splitmix64 increment constant)
//   next:   x ^= x >> 12; x ^= x << 25; x ^= x >> 27;
//           return x * 0x2545F4914F6CDD1D          (xorshift64*)
//   uniform [0,1): (next() >> 11) * 2^-53
//   normal:        Marsaglia polar method on uniform pairs, second value of
//                  each accepted pair is cached and returned on the next call
//   index(n):      next() % n
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t z = seed + 0x9E3779B97F4A7C15ull;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        state_ = z ^ (z >> 31);
        if (state_ == 0) state_ = 0x9E3779B97F4A7C15ull;
    }

    std::uint64_t next_u64() {
        state_ ^= state_ >> 12;
        state_ ^= state_ << 25;
        state_ ^= state_ >> 27;
        return state_ * 0x2545F4914F6CDD1Dull;
    }

    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform();
    }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        has_spare_ = true;
        return u * m;
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    std::size_t index(std::size_t n) {
        return static_cast<std::size_t>(next_u64() % static_cast<std::uint64_t>(n));
    }

    void fill_uniform(std::span<double> out, double lo, double hi) {
        for (double& x : out) x = uniform(lo, hi);
    }

    void fill_normal(std::span<double> out, double mean = 0.0, double sd = 1.0) {
        for (double& x : out) x = normal(mean, sd);
    }

    // Fisher-Yates, iterating from the back.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

    // Derives an independent stream, e.g. one per training stage.
    Rng fork() { return Rng(next_u64()); }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace gzsl
