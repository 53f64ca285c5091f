#pragma once

#include <cstdint>
#include <random>

namespace boicp {

/// Deterministic uniform double stream on top of mt19937_64.
///
/// Doubles are derived from the raw 64-bit output (53 mantissa bits)
/// instead of std::uniform_real_distribution, whose output is not
/// specified bit-for-bit across standard library implementations.
class UniformRng {
public:
    explicit UniformRng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1).
    double next() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    double in(double lo, double hi) { return lo + (hi - lo) * next(); }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

}  // namespace boicp
