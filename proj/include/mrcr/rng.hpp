#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>

namespace mrcr {

// Seedable generator with a fixed, platform-independent mapping from engine
// output to variates (std distributions are implementation-defined).
//   uniform: top 53 bits of one mt19937_64 draw, shifted to the open interval (0,1)
//   normal:  Box-Muller cosine branch, two uniforms per variate
//   index:   floor(uniform * n)
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

    double normal() {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    std::size_t index(std::size_t n) {
        const auto k = static_cast<std::size_t>(uniform() * static_cast<double>(n));
        return k < n ? k : n - 1;
    }

private:
    std::mt19937_64 engine_;
};

// SplitMix64 finaliser over (base, stream); used for independent sub-streams.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace mrcr
