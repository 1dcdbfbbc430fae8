#pragma once

#include <cstdint>
#include <random>

namespace ehe {

/// Deterministic RNG stream. All draws are pure functions of the seed (and
/// stream id), so identical seeds reproduce identical sequences bit for bit.
/// Not thread-safe; parallel code owns one Rng per worker/draw.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    /// Substream seeded deterministically from (seed, stream).
    Rng(std::uint64_t seed, std::uint64_t stream);

    /// Uniform on the open interval (0, 1); never returns 0 or 1.
    double uniform();

    /// Standard normal via inverse CDF (single uniform per draw).
    double normal();

    /// Exponential with unit rate.
    double exponential();

    /// Gamma(shape) / rate, Marsaglia-Tsang squeeze.
    double gamma(double shape, double rate);

    std::uint64_t next_u64() { return gen_(); }

private:
    std::mt19937_64 gen_;
};

}  // namespace ehe
