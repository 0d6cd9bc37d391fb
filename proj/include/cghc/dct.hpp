#pragma once

#include <array>
#include <cstdint>

namespace cghc {

// Zig-zag scan: zigzag position -> natural (row-major) index.
extern const std::array<int, 64> kZigZag;

// Base luminance quantization table (natural order).
extern const std::array<uint16_t, 64> kBaseLumaQuant;

// Forward 8x8 DCT-II with JPEG normalization. Input is the level-shifted
// spatial block (natural order); output coefficients in natural order.
void fdct8x8(const double in[64], double out[64]);

// Inverse of fdct8x8.
void idct8x8(const double in[64], double out[64]);

// Quality-scaled quantization table, natural order. q in [1,100]:
// scale = 5000/q below 50 else 200-2q; entry = clamp(floor((base*scale+50)/100), 1, 255).
// q=50 reproduces the base table, q=1 saturates every entry at 255.
std::array<uint16_t, 64> scale_quant_table(int quality);

} // namespace cghc
