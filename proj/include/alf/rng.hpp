#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace alf {

/// Deterministic random source. All distributions are derived from the raw
/// mt19937_64 stream by hand so that a given seed produces the same values
/// on every platform and standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1), 53-bit resolution.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1); never returns an exact endpoint.
    double uniform01_open() {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t uniform_int(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<__uint128_t>(engine_()) * n) >> 64);
    }

    /// Exponential with mean 1; strictly positive.
    double exponential() { return -std::log(uniform01_open()); }

    /// Standard normal via Box-Muller. Consumes exactly two draws per call.
    double normal() {
        const double u1 = uniform01_open();
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

private:
    std::mt19937_64 engine_;
};

/// Seed for the i-th independent work item of a batch job. Keeps batch
/// results identical no matter how the items are distributed over workers.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return master ^ index;
}

}  // namespace alf
