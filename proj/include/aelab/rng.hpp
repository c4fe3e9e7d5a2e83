#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace aelab {

/// Seeded random stream with platform-independent output.
///
/// The engine is std::mt19937_64, whose sequence is fixed by the standard.
/// The distributions are implemented here rather than taken from <random>,
/// because libstdc++ and libc++ disagree on those and a given seed must
/// reproduce the same datasets and training runs everywhere.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const noexcept { return seed_; }

    std::uint64_t next_u64() { return engine_(); }
    /// Uniform in [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [0, n). n must be positive.
    std::size_t uniform_index(std::size_t n);
    bool bernoulli(double p) { return uniform() < p; }
    /// Standard normal via the Box-Muller transform; pairs are cached.
    double normal();
    double normal(double mean, double stddev) { return mean + stddev * normal(); }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

}  // namespace aelab
