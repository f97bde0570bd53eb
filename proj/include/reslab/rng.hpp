#pragma once

#include <cstdint>

namespace reslab {

// counter-based generator: draw n of stream `seed` is splitmix64(seed * G + n), G the 64-bit golden ratio
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t bits(std::uint64_t n) const
    {
        std::uint64_t z = seed_ * 0x9E3779B97F4A7C15ULL + n;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    // uniform in [0,1) from the top 53 bits
    double uniform(std::uint64_t n) const { return (bits(n) >> 11) * 0x1.0p-53; }

    double next() { return uniform(counter_++); }
    double next(double lo, double hi) { return lo + (hi - lo) * next(); }

private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
};

}  // namespace reslab
