#pragma once

#include <cstdint>

namespace kakeya {

// Counter-based generator: value i of stream `seed` is splitmix64(seed, i).
// Stateless, so parallel consumers draw identical values regardless of
// scheduling; every stochastic report records its seed.
inline std::uint64_t splitmix64(std::uint64_t seed, std::uint64_t counter) {
    std::uint64_t z = seed + (counter + 1) * 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Uniform double in [0, 1).
inline double uniform01(std::uint64_t seed, std::uint64_t counter) {
    return static_cast<double>(splitmix64(seed, counter) >> 11) * 0x1.0p-53;
}

// Convenience stream wrapper around the counter-based core.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed, std::uint64_t start = 0) : seed_(seed), counter_(start) {}

    std::uint64_t next_u64() { return splitmix64(seed_, counter_++); }
    double next_unit() { return uniform01(seed_, counter_++); }
    // Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }
    double next_range(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

  private:
    std::uint64_t seed_;
    std::uint64_t counter_;
};

}  // namespace kakeya
