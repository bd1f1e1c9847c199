// rng.hpp -- seeded random streams for reproducible Monte Carlo

#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace sbl {

// 64-bit finalizer, used to decorrelate worker streams derived from one base seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// One stream per Monte Carlo worker. All draws go through explicit helpers so
// that the bit-to-double mapping is owned by us, not the standard library
// distributions (which may differ between implementations).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(splitmix64(seed)) {}

    // Stream for worker `index`; independent of all other indices.
    static Rng worker_stream(std::uint64_t base_seed, std::uint64_t index) {
        return Rng(base_seed ^ splitmix64(0x5851f42d4c957f2dULL + index));
    }

    // uniform in [0,1), 53-bit resolution
    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    int fair_sign() { return (eng_() & 1ULL) ? 1 : -1; }

    // Knuth product method; exact and fast for the means used here (<= ~600).
    std::uint64_t poisson(double mean) {
        const double threshold = std::exp(-mean);
        std::uint64_t k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= uniform01();
        } while (p > threshold);
        return k - 1;
    }

    std::uint64_t raw() { return eng_(); }

private:
    std::mt19937_64 eng_;
};

} // namespace sbl
