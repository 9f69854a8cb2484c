#pragma once

#include <cstdint>
#include <random>

namespace tandem {

// Explicitly seeded stream; every sample consumes exactly one uniform.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : rng_(seed) {}

    // uniform on [0, 1) with 53 random bits
    double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 rng_;
};

}  // namespace tandem
