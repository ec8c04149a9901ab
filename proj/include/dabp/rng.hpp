#ifndef DABP_RNG_HPP
#define DABP_RNG_HPP

#include <cstdint>
#include <random>
#include <stdexcept>

namespace dabp {

// Deterministic random source. All sampling goes through the helpers below
// instead of std::*_distribution so that a seed produces the same stream on
// every platform (mt19937_64 itself is pinned by the standard, the
// distributions are not).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next() { return gen_(); }

    // uniform real in [lo, hi)
    double uniform(double lo, double hi) {
        const double u = (gen_() >> 11) * 0x1.0p-53;
        return lo + u * (hi - lo);
    }

    // unbiased integer in [0, n)
    int uniform_int(int n) {
        if (n <= 0) throw std::invalid_argument("uniform_int: n must be positive");
        const std::uint64_t un = static_cast<std::uint64_t>(n);
        const std::uint64_t limit = (UINT64_MAX / un) * un;
        std::uint64_t r;
        do {
            r = gen_();
        } while (r >= limit);
        return static_cast<int>(r % un);
    }

    bool bernoulli(double p) { return uniform(0.0, 1.0) < p; }

private:
    std::mt19937_64 gen_;
};

// SplitMix64 step; used to derive independent per-instance seeds from a base
// seed without correlated low bits.
inline std::uint64_t mix_seed(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    return mix_seed(base + 0x632be59bd9b4e019ULL * (index + 1));
}

} // namespace dabp

#endif
