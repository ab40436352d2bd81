#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace cfair {

namespace detail {
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}
}  // namespace detail

/// Counter-based deterministic generator: draw k of a given seed is a pure
/// function of (seed, k), so identical seed + identical draw sequence gives
/// bit-identical outputs on any platform.
class Rng {
public:
    explicit Rng(uint64_t seed) : seed_(detail::splitmix64(seed ^ 0x5bf03635d1a4f8e7ULL)) {}

    uint64_t next_u64() {
        return detail::splitmix64(seed_ + 0x9e3779b97f4a7c15ULL * (++counter_));
    }

    /// Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via the Box-Muller cosine branch; consumes two draws.
    double normal() {
        double u1 = 1.0 - uniform();  // (0, 1]
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Uniform integer in [0, n). Modulo bias is immaterial here (n << 2^64).
    int uniform_int(int n) { return static_cast<int>(next_u64() % static_cast<uint64_t>(n)); }

    /// Independent child stream; deterministic in (parent seed, stream id).
    Rng fork(uint64_t stream) const {
        Rng r(0);
        r.seed_ = detail::splitmix64(seed_ ^ detail::splitmix64(stream + 0x2545f4914f6cdd1dULL));
        return r;
    }

    std::vector<int> permutation(int n) {
        std::vector<int> p(n);
        for (int i = 0; i < n; ++i) p[i] = i;
        for (int i = n - 1; i > 0; --i) {
            int j = uniform_int(i + 1);
            std::swap(p[i], p[j]);
        }
        return p;
    }

    uint64_t seed() const { return seed_; }

private:
    uint64_t seed_;
    uint64_t counter_ = 0;
};

}  // namespace cfair
