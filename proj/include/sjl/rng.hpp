#pragma once

#include <cstdint>

namespace sjl {

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Counter-based generator: the stream is a pure function of (key, stream id, counter),
// so any column, row, or trial can be regenerated independently of the others.
class CounterRng {
public:
    CounterRng(std::uint64_t key, std::uint64_t stream) noexcept
        : base_(splitmix64(key ^ splitmix64(stream + 0x632be59bd9b4e019ULL))) {}

    std::uint64_t next() noexcept { return splitmix64(base_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

    // Uniform on [0, bound) without modulo bias (Lemire).
    std::uint64_t below(std::uint64_t bound) noexcept {
        using u128 = unsigned __int128;
        u128 prod = u128(next()) * bound;
        auto low = static_cast<std::uint64_t>(prod);
        if (low < bound) {
            const std::uint64_t threshold = (0 - bound) % bound;
            while (low < threshold) {
                prod = u128(next()) * bound;
                low = static_cast<std::uint64_t>(prod);
            }
        }
        return static_cast<std::uint64_t>(prod >> 64);
    }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    int sign() noexcept { return (next() >> 63) ? 1 : -1; }

private:
    std::uint64_t base_;
    std::uint64_t counter_ = 0;
};

// Seed for the i-th independent sub-experiment of a run keyed by `seed`.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
    return CounterRng(seed, index).next();
}

}  // namespace sjl
