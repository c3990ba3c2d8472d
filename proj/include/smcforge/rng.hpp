#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

// Counter-based random primitives. Every draw is a pure function of a key
// built from (seed, tags...), so generated worlds do not depend on evaluation
// order or worker count, and equal seeds give bitwise-equal output.

namespace smcforge::rng {

inline constexpr std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Hash key for one random decision.  Fold in tags with derive().
class Key {
public:
    explicit constexpr Key(std::uint64_t seed) : v_(splitmix64(seed ^ 0x5851f42d4c957f2dULL)) {}

    [[nodiscard]] constexpr Key derive(std::uint64_t tag) const {
        Key k = *this;
        k.v_ = splitmix64(k.v_ ^ (tag + 0x632be59bd9b4e019ULL));
        return k;
    }

    [[nodiscard]] constexpr std::uint64_t bits() const { return v_; }

private:
    std::uint64_t v_ = 0;
};

/// Uniform in [0, 1) with 53 random bits.
inline double uniform01(Key k) {
    return static_cast<double>(k.bits() >> 11) * 0x1.0p-53;
}

/// Uniform in [lo, hi).
inline double uniform(Key k, double lo, double hi) {
    return lo + (hi - lo) * uniform01(k);
}

/// Standard normal via Box-Muller; the two uniforms come from sub-keys.
inline double normal01(Key k) {
    const double u1 = uniform01(k.derive(1));
    const double u2 = uniform01(k.derive(2));
    // u1 == 0 would take log(0); nudge to the smallest representable draw.
    const double r = std::sqrt(-2.0 * std::log(u1 > 0.0 ? u1 : 0x1.0p-53));
    return r * std::cos(2.0 * std::numbers::pi * u2);
}

inline double normal(Key k, double mean, double stddev) {
    return mean + stddev * normal01(k);
}

/// Exponential with the given mean.
inline double exponential(Key k, double mean) {
    const double u = uniform01(k);
    return -mean * std::log(1.0 - u);
}

/// Sequential stream for shuffles and init loops (single consumer, fixed order).
class Sequence {
public:
    explicit Sequence(std::uint64_t seed) : state_(seed ^ 0x9e3779b97f4a7c15ULL) {}
    explicit Sequence(Key k) : state_(k.bits()) {}

    std::uint64_t next() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return splitmix64(state_);
    }

    double next_uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Unbiased integer in [0, n) by rejection.
    std::uint64_t next_below(std::uint64_t n) {
        if (n <= 1) return 0;
        const std::uint64_t limit = ~0ULL - ~0ULL % n;
        std::uint64_t x = next();
        while (x >= limit) x = next();
        return x % n;
    }

    template <class T>
    void shuffle(std::vector<T>& xs) {
        for (std::size_t i = xs.size(); i > 1; --i) {
            std::swap(xs[i - 1], xs[next_below(i)]);
        }
    }

private:
    std::uint64_t state_;
};

}  // namespace smcforge::rng
