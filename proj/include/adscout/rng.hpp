#pragma once

#include <cstdint>
#include <vector>

namespace adscout {

// Deterministic 64-bit generator (splitmix64). We avoid the standard
// distributions because their output is implementation-defined; campaign
// reports must be reproducible byte-for-byte across toolchains.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform draw in [0, n). n must be > 0.
    size_t pick(size_t n) {
        // 128-bit multiply avoids modulo bias well below any measurable level.
        return static_cast<size_t>((static_cast<__uint128_t>(next()) * n) >> 64);
    }

    double unit() {
        return static_cast<double>(next() >> 11) * (1.0 / 9007199254740992.0);
    }

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (size_t i = items.size(); i > 1; --i) {
            std::swap(items[i - 1], items[pick(i)]);
        }
    }

private:
    uint64_t state_;
};

} // namespace adscout
