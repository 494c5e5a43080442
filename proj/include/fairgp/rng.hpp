#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace fairgp {

/// Deterministic RNG wrapper. All draws go through our own helpers instead of
/// std distributions, whose output is implementation-defined; this keeps runs
/// byte-reproducible across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform in [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller; caches the second variate.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * M_PI * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    /// Uniform index in [0, n), n > 0. Simple rejection to avoid modulo bias.
    std::size_t index(std::size_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v = next_u64();
        while (v >= limit) v = next_u64();
        return static_cast<std::size_t>(v % n);
    }

    bool bernoulli(double p) { return uniform() < p; }

    /// Fisher-Yates; fixed algorithm so shuffles match across platforms.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[index(i)]);
        }
    }

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace fairgp
