#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace lsmu {

// Deterministic random source. mt19937_64 is fully specified by the standard,
// and the distributions below are implemented explicitly (the <random>
// distribution classes are implementation-defined), so identical seeds give
// identical streams on any platform.
class Rng {
public:
    Rng() : Rng(0x9e3779b97f4a7c15ull) {}
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

    // Uniform on [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Marsaglia polar method; caches the second deviate.
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

    double normal(double mean, double std) { return mean + std * normal(); }

    std::uint64_t next_u64() { return engine_(); }

    // Integer in [0, n).
    std::uint64_t uniform_index(std::uint64_t n) {
        // Rejection to avoid modulo bias.
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    std::uint64_t seed() const { return seed_; }

    // Derive an independent stream (e.g. one per replica or per sample).
    Rng spawn(std::uint64_t stream_id) const {
        return Rng(splitmix64(seed_ ^ splitmix64(stream_id + 0x632be59bd9b4e019ull)));
    }

    static std::uint64_t splitmix64(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ull;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return x ^ (x >> 31);
    }

private:
    std::uint64_t seed_ = 0;
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace lsmu
