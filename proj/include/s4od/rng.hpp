#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace s4od {

// splitmix64 step; the core mixer behind Rng and seed derivation.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Self-contained deterministic generator. Byte-identical streams across
/// platforms and standard-library versions, which std::mt19937 distributions
/// do not guarantee. Every randomized operation in the library takes one of
/// these explicitly.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() { return splitmix64(state_); }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform_range(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n), n >= 1 (Lemire reduction)
    std::uint64_t uniform_int(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    bool bernoulli(double p) { return uniform() < p; }

    // standard normal, Box-Muller with a cached spare
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

/// Derives an independent stream seed from a base seed, a stage tag and up to
/// two integer keys (e.g. image id, epoch). Stages draw from disjoint streams,
/// so skipping one stage never shifts another stage's randomness.
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view tag,
                                 std::uint64_t a = 0, std::uint64_t b = 0) {
    std::uint64_t h = 1469598103934665603ULL ^ base;
    for (const char ch : tag) {
        h ^= static_cast<std::uint8_t>(ch);
        h *= 1099511628211ULL;
    }
    std::uint64_t s = h;
    splitmix64(s);
    s ^= (a + 1) * 0x9e3779b97f4a7c15ULL;
    splitmix64(s);
    s ^= (b + 1) * 0xc2b2ae3d27d4eb4fULL;
    std::uint64_t out = splitmix64(s);
    return out;
}

inline Rng make_rng(std::uint64_t base, std::string_view tag,
                    std::uint64_t a = 0, std::uint64_t b = 0) {
    return Rng(derive_seed(base, tag, a, b));
}

}  // namespace s4od
