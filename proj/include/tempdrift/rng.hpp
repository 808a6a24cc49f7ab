#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace tempdrift {

// 64-bit FNV-1a. Also used by the featurizer, so feature indices are
// identical across platforms and compilers.
constexpr uint64_t fnv1a64(std::string_view bytes) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : bytes) {
        h ^= static_cast<uint8_t>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

constexpr uint64_t avalanche64(uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
}

constexpr uint64_t hash_combine(uint64_t a, uint64_t b) {
    return avalanche64(a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 12) + (a >> 4)));
}

// SplitMix64 stream. Fully specified so that seeded runs replay
// bit-identically on any platform; std:: engines and distributions are
// deliberately not used anywhere in the library.
class Rng {
public:
    explicit Rng(uint64_t state) : state_(state) {}

    uint64_t next() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return avalanche64(state_);
    }

    // Uniform over [lo, hi], both ends inclusive. Rejection sampling, exact.
    int64_t uniform_int(int64_t lo, int64_t hi) {
        const uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
        if (span == 0) return lo + static_cast<int64_t>(next());  // full 64-bit range
        const uint64_t threshold = (0 - span) % span;
        for (;;) {
            const uint64_t r = next();
            if (r >= threshold) return lo + static_cast<int64_t>(r % span);
        }
    }

    // Uniform in [0, 1) with 53 random bits.
    double uniform01() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

private:
    uint64_t state_;
};

// Independent per-item streams keyed by (seed, stage tag, index) or
// (seed, stage tag, id). Generation order and parallelism cannot change
// what any one item draws.
inline Rng stream_for(uint64_t seed, std::string_view tag, uint64_t index) {
    return Rng(hash_combine(hash_combine(seed, fnv1a64(tag)), index));
}

inline Rng stream_for(uint64_t seed, std::string_view tag, std::string_view id,
                      uint64_t k = 0) {
    return Rng(hash_combine(hash_combine(hash_combine(seed, fnv1a64(tag)), fnv1a64(id)), k));
}

// Fisher-Yates with the project Rng; std::shuffle's draw order is
// implementation-defined, this is not.
inline void shuffle_indices(std::vector<size_t>& order, Rng& rng) {
    if (order.size() < 2) return;
    for (size_t i = order.size() - 1; i > 0; --i) {
        const auto j = static_cast<size_t>(rng.uniform_int(0, static_cast<int64_t>(i)));
        std::swap(order[i], order[j]);
    }
}

}  // namespace tempdrift
