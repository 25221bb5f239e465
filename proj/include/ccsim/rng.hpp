#ifndef CCSIM_RNG_HPP
#define CCSIM_RNG_HPP

#include <array>
#include <cstdint>
#include <initializer_list>

namespace ccsim {

// splitmix64 finalizer; also used as the seed-expansion step below.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Derives an independent substream seed from a base seed and a path of ids
// (stream tag, trial index, user id, ...). Distinct paths give distinct,
// well-mixed seeds, so substreams can be consumed in any order or in
// parallel and still reproduce bit-identically.
inline std::uint64_t derive_seed(std::uint64_t base,
                                 std::initializer_list<std::uint64_t> path) {
    std::uint64_t h = mix64(base);
    for (std::uint64_t id : path)
        h = mix64(h ^ (id + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)));
    return h;
}

// Substream tags used throughout the library. Kept in one place so no two
// call sites accidentally share a stream.
inline constexpr std::uint64_t kStreamPlacement = 1;
inline constexpr std::uint64_t kStreamDemands = 2;
inline constexpr std::uint64_t kStreamPayload = 3;
inline constexpr std::uint64_t kStreamColoring = 4;

// xoshiro256** with splitmix64 seeding. We roll our own uniform mappings
// instead of <random> distributions so that identical seeds reproduce
// identical draws on every standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t s = seed;
        for (auto& w : state_) {
            w = mix64(s);
            s = w;
        }
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform double in [0, 1), 53-bit resolution.
    double next_unit() { return (next_u64() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, bound), unbiased via rejection.
    std::uint64_t next_below(std::uint64_t bound) {
        const std::uint64_t limit = bound * (UINT64_MAX / bound);
        std::uint64_t r;
        do {
            r = next_u64();
        } while (r >= limit);
        return r % bound;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> state_{};
};

// Compensated (Kahan) accumulator.
struct KahanSum {
    double sum = 0.0;
    double carry = 0.0;

    void add(double x) {
        const double y = x - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }

    double value() const { return sum; }
};

} // namespace ccsim

#endif
