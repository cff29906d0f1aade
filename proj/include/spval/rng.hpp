#pragma once

#include <cstdint>
#include <random>

namespace spval {

// splitmix64 step; used only to expand and derive seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Deterministic uniform stream. std::mt19937_64 is fully specified by the
// standard; the [0,1) mapping below avoids std::uniform_real_distribution,
// whose output is implementation-defined. Streams therefore replay
// bit-for-bit for a fixed seed, independent of platform.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : gen_(seed) {}

    // Child stream `tag` of `root`. Derivation: mix tag into root with the
    // 64-bit golden ratio, pass through two splitmix64 steps, xor. Distinct
    // tags give statistically independent streams even for adjacent roots.
    static RngStream derive(std::uint64_t root, std::uint64_t tag) {
        std::uint64_t s = root ^ (0x9E3779B97F4A7C15ULL * (tag + 1));
        std::uint64_t seed = splitmix64(s);
        seed ^= splitmix64(s);
        return RngStream(seed);
    }

    std::uint64_t next_u64() { return gen_(); }

    // Uniform on [0,1) with 53 random bits.
    double next_double() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

private:
    std::mt19937_64 gen_;
};

} // namespace spval
