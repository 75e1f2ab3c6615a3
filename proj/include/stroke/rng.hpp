#pragma once

#include <cmath>
#include <cstdint>
#include <utility>

namespace stroke {

// Deterministic splitmix64 generator. Standard-library distributions are
// implementation-defined, so everything that feeds frozen test values or
// byte-reproducible artifacts draws from this instead.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform in [0,1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform in [0,n). Modulo bias is irrelevant at these ranges.
    std::int64_t uniform_int(std::int64_t n) {
        return static_cast<std::int64_t>(next_u64() % static_cast<std::uint64_t>(n));
    }

    bool coin() { return (next_u64() & 1u) != 0; }

    // Box-Muller, cosine branch only so the draw count per call is fixed.
    double normal() {
        const double u1 = 1.0 - uniform(); // (0,1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

    // Fisher-Yates.
    template <typename It>
    void shuffle(It first, It last) {
        const std::int64_t n = last - first;
        for (std::int64_t i = n - 1; i > 0; --i) {
            std::swap(first[i], first[uniform_int(i + 1)]);
        }
    }

    // Independent substream; used to give each sample / video its own seed.
    Rng fork(std::uint64_t stream) const {
        Rng r(state_ ^ (0x632be59bd9b4e019ull * (stream + 1)));
        r.next_u64();
        return r;
    }

private:
    std::uint64_t state_;
};

} // namespace stroke
