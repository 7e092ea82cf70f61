#include "ghzkd/rng.hpp"

#include <bit>
#include <numeric>
#include <stdexcept>

namespace ghzkd {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

RandomStream::RandomStream(std::uint64_t seed) : seed_(seed) {
    std::uint64_t x = seed;
    for (auto& word : state_) word = splitmix64(x);
}

std::uint64_t RandomStream::next_u64() {
    const std::uint64_t result = std::rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = std::rotl(state_[3], 45);
    return result;
}

double RandomStream::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint32_t RandomStream::uniform_int(std::uint32_t bound) {
    if (bound == 0) throw std::invalid_argument("uniform_int: bound must be > 0");
    const std::uint32_t mask = std::bit_ceil(bound) - 1;
    std::uint32_t value;
    do {
        value = static_cast<std::uint32_t>(next_u64()) & mask;
    } while (value >= bound);
    return value;
}

int RandomStream::coin() {
    return static_cast<int>(next_u64() >> 63);
}

bool RandomStream::bernoulli(double p) {
    return uniform() < p;
}

RandomStream RandomStream::derive(std::uint64_t salt) const {
    std::uint64_t x = seed_ + 0x9E3779B97F4A7C15ULL * (salt + 1);
    return RandomStream(splitmix64(x));
}

std::vector<int> sample_without_replacement(RandomStream& rng, int total, int count) {
    if (count < 0 || count > total) {
        throw std::invalid_argument("sample_without_replacement: count out of range");
    }
    std::vector<int> pool(static_cast<std::size_t>(total));
    std::iota(pool.begin(), pool.end(), 0);
    for (int i = 0; i < count; ++i) {
        const int j = i + static_cast<int>(rng.uniform_int(static_cast<std::uint32_t>(total - i)));
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
    }
    pool.resize(static_cast<std::size_t>(count));
    return pool;
}

}  // namespace ghzkd
