#pragma once

#include <cstdint>
#include <string>

namespace adscout {

inline uint64_t fnv1a64(const std::string& data) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Short display id used for graph nodes and prompt text, e.g. "4662c1".
inline std::string short_hash(const std::string& data) {
    static const char* hex = "0123456789abcdef";
    uint64_t h = fnv1a64(data);
    std::string out(6, '0');
    for (int i = 0; i < 6; ++i) {
        out[i] = hex[(h >> (4 * (11 - i))) & 0xf];
    }
    return out;
}

} // namespace adscout
