#pragma once

#include <array>
#include <cstdint>

namespace cghc::jpegdetail {

// Standard luminance Huffman tables: BITS[i] = number of codes of length i+1,
// followed by the symbol values in code order.
struct HuffSpec {
    std::array<uint8_t, 16> bits;
    const uint8_t* vals;
    int nvals;
};

extern const HuffSpec kDcLuma;
extern const HuffSpec kAcLuma;

// Magnitude category: smallest t with |v| < 2^t (0 for v == 0).
inline int bit_category(int v) {
    int a = v < 0 ? -v : v;
    int t = 0;
    while (a) {
        a >>= 1;
        ++t;
    }
    return t;
}

} // namespace cghc::jpegdetail
