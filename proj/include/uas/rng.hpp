#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace uas {

/// Single seeded random stream for a run. Distribution transforms are
/// implemented here, not taken from <random>.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1) with 53 bits of resolution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t index(std::uint64_t n) {
        auto i = static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
        return i < n ? i : n - 1;
    }

    /// Standard normal via Box-Muller; always consumes exactly two uniforms.
    double normal() {
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    /// Poisson sample. Knuth's product method on chunks of mean <= 30, using
    /// additivity of independent Poisson variables for larger means.
    std::uint64_t poisson(double mean) {
        std::uint64_t total = 0;
        while (mean > 0.0) {
            const double chunk = mean > 30.0 ? 30.0 : mean;
            mean -= chunk;
            const double limit = std::exp(-chunk);
            std::uint64_t k = 0;
            double prod = uniform();
            while (prod > limit) {
                ++k;
                prod *= uniform();
            }
            total += k;
        }
        return total;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace uas
