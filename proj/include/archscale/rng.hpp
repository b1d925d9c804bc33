#pragma once

#include <cmath>
#include <cstdint>

namespace archscale {

// Deterministic, implementation-independent random streams.
//
// Every stochastic routine in the toolkit derives an independent stream from
// (seed, key...) so results do not depend on evaluation order or parallelism.
// std::normal_distribution is not pinned down by the standard, so normals are
// generated by Box-Muller over our own uniforms.

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) { reseed(seed); }

    // Stream derivation: mixes the keys through splitmix so that nearby
    // (seed, key) pairs give unrelated streams.
    Rng(std::uint64_t seed, std::uint64_t k1, std::uint64_t k2 = 0, std::uint64_t k3 = 0) {
        std::uint64_t s = seed;
        (void)splitmix64(s);
        s ^= 0xA0761D6478BD642FULL * (k1 + 1);
        (void)splitmix64(s);
        s ^= 0xE7037ED1A0B428DBULL * (k2 + 1);
        (void)splitmix64(s);
        s ^= 0x8EBC6AF09C88C6E3ULL * (k3 + 1);
        reseed(s);
    }

    std::uint64_t next_u64() {
        // xoshiro256++
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [-1, 1].
    double uniform_sym() { return 2.0 * uniform() - 1.0; }

    // Uniform integer in [0, n).
    std::uint64_t uniform_index(std::uint64_t n) {
        return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n;
    }

    // Standard normal, Box-Muller. Consumes exactly two uniforms per pair.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    void reseed(std::uint64_t seed) {
        std::uint64_t s = seed;
        for (auto& w : s_) w = splitmix64(s);
        have_spare_ = false;
        spare_ = 0.0;
    }

    std::uint64_t s_[4]{};
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace archscale
