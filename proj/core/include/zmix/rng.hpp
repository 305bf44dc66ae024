#pragma once

#include <zmix/types.hpp>

#include <cstdint>
#include <random>
#include <vector>

namespace zmix {

/// splitmix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return mix64(mix64(seed) ^ mix64(stream + 0x632be59bd9b4e019ULL));
}

/// Seeded generator whose derived draws do not depend on the standard
/// library's distribution implementations, so traces are reproducible across
/// toolchains as well as across runs.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [lo, hi], unbiased.
    std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi);

    /// Exponential with the given mean, continuous.
    double exponential(double mean);

    bool bernoulli(double p) { return uniform01() < p; }

    void fill(std::uint8_t* out, std::size_t n);

private:
    std::mt19937_64 engine_;
};

/// Arrival ticks of a Poisson process with `rate` events per tick over
/// [start, end). Inter-arrival gaps are drawn in continuous time and each
/// arrival fires at the floor of its time.
std::vector<Tick> poisson_arrivals(double rate, Tick start, Tick end, Rng& rng);

} // namespace zmix
