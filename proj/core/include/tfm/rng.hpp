#pragma once

#include <cstdint>
#include <random>

namespace tfm {

/// SplitMix64 finalizer (Steele, Lea, Flood 2014).
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seedable, splittable generator used by the simulator.
///
/// Algorithm, fixed so results can be reproduced elsewhere:
///  - stream (seed, id) is seeded with splitmix64(seed ^ splitmix64(id + 1))
///    and drives a std::mt19937_64 (the engine's output is fully specified by
///    the C++ standard);
///  - uniform(): (next() >> 11) * 2^-53, in [0, 1);
///  - normal(): Box-Muller on u1 = 1 - uniform(), u2 = uniform(); the pair
///    yields r cos(2 pi u2) first and caches r sin(2 pi u2) for the next call.
///
/// std::normal_distribution is not used because its algorithm differs
/// between standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

    /// Independent child stream; does not advance this generator.
    Rng split(std::uint64_t id) const { return Rng(seed_, splitmix64(stream_ ^ splitmix64(id + 0x9E37))); }

    std::uint64_t next() { return engine_(); }
    double uniform();
    double normal();

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream() const noexcept { return stream_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace tfm
