#include "cghc/dct.hpp"

#include <cmath>
#include <stdexcept>

namespace cghc {

const std::array<int, 64> kZigZag = {
     0,  1,  8, 16,  9,  2,  3, 10,
    17, 24, 32, 25, 18, 11,  4,  5,
    12, 19, 26, 33, 40, 48, 41, 34,
    27, 20, 13,  6,  7, 14, 21, 28,
    35, 42, 49, 56, 57, 50, 43, 36,
    29, 22, 15, 23, 30, 37, 44, 51,
    58, 59, 52, 45, 38, 31, 39, 46,
    53, 60, 61, 54, 47, 55, 62, 63,
};

const std::array<uint16_t, 64> kBaseLumaQuant = {
    16, 11, 10, 16,  24,  40,  51,  61,
    12, 12, 14, 19,  26,  58,  60,  55,
    14, 13, 16, 24,  40,  57,  69,  56,
    14, 17, 22, 29,  51,  87,  80,  62,
    18, 22, 37, 56,  68, 109, 103,  77,
    24, 35, 55, 64,  81, 104, 113,  92,
    49, 64, 78, 87, 103, 121, 120, 101,
    72, 92, 95, 98, 112, 100, 103,  99,
};

namespace {

// C[u][x] = c(u)/2 * cos((2x+1) u pi / 16), so that S = C s C^T.
struct DctBasis {
    double m[8][8];
    DctBasis() {
        const double pi = 3.14159265358979323846264338327950288;
        for (int u = 0; u < 8; ++u) {
            const double cu = (u == 0) ? std::sqrt(0.5) : 1.0;
            for (int x = 0; x < 8; ++x)
                m[u][x] = 0.5 * cu * std::cos((2 * x + 1) * u * pi / 16.0);
        }
    }
};
const DctBasis kBasis;

} // namespace

void fdct8x8(const double in[64], double out[64]) {
    double tmp[64];
    // rows: tmp[y][u] = sum_x in[y][x] * C[u][x]
    for (int y = 0; y < 8; ++y)
        for (int u = 0; u < 8; ++u) {
            double acc = 0.0;
            for (int x = 0; x < 8; ++x) acc += in[y * 8 + x] * kBasis.m[u][x];
            tmp[y * 8 + u] = acc;
        }
    // columns: out[v][u] = sum_y tmp[y][u] * C[v][y]
    for (int v = 0; v < 8; ++v)
        for (int u = 0; u < 8; ++u) {
            double acc = 0.0;
            for (int y = 0; y < 8; ++y) acc += tmp[y * 8 + u] * kBasis.m[v][y];
            out[v * 8 + u] = acc;
        }
}

void idct8x8(const double in[64], double out[64]) {
    double tmp[64];
    // columns: tmp[y][u] = sum_v C[v][y] * in[v][u]
    for (int y = 0; y < 8; ++y)
        for (int u = 0; u < 8; ++u) {
            double acc = 0.0;
            for (int v = 0; v < 8; ++v) acc += kBasis.m[v][y] * in[v * 8 + u];
            tmp[y * 8 + u] = acc;
        }
    // rows: out[y][x] = sum_u tmp[y][u] * C[u][x]
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) {
            double acc = 0.0;
            for (int u = 0; u < 8; ++u) acc += tmp[y * 8 + u] * kBasis.m[u][x];
            out[y * 8 + x] = acc;
        }
}

std::array<uint16_t, 64> scale_quant_table(int quality) {
    if (quality < 1 || quality > 100)
        throw std::invalid_argument("quality must be in [1,100]");
    const int scale = quality < 50 ? 5000 / quality : 200 - 2 * quality;
    std::array<uint16_t, 64> q{};
    for (int i = 0; i < 64; ++i) {
        long v = (static_cast<long>(kBaseLumaQuant[i]) * scale + 50) / 100;
        if (v < 1) v = 1;
        if (v > 255) v = 255;
        q[i] = static_cast<uint16_t>(v);
    }
    return q;
}

} // namespace cghc
