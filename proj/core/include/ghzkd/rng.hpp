#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace ghzkd {

// Seeded, splittable random stream (xoshiro256++ state expanded from the seed
// with splitmix64). All sampling is hand-rolled: std::uniform_*_distribution
// is implementation-defined, which would break bit-reproducible runs.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed = 1);

    std::uint64_t next_u64();

    // Uniform in [0, 1) with 53-bit resolution.
    double uniform();

    // Uniform in [0, bound). bound must be > 0.
    std::uint32_t uniform_int(std::uint32_t bound);

    // Fair bit.
    int coin();

    bool bernoulli(double p);

    // Independent child stream. Depends only on (seed, salt), not on how much
    // of this stream has already been consumed.
    RandomStream derive(std::uint64_t salt) const;

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
    std::array<std::uint64_t, 4> state_;
};

// `count` distinct values from [0, total), in random order.
std::vector<int> sample_without_replacement(RandomStream& rng, int total, int count);

}  // namespace ghzkd
