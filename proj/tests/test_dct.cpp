#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <random>

#include "cghc/dct.hpp"

using namespace cghc;

namespace {

// O(N^4) direct double-sum DCT-II, the oracle for the fast path.
void dct_reference(const double in[64], double out[64]) {
    const double pi = 3.14159265358979323846;
    for (int v = 0; v < 8; ++v)
        for (int u = 0; u < 8; ++u) {
            double acc = 0.0;
            for (int y = 0; y < 8; ++y)
                for (int x = 0; x < 8; ++x)
                    acc += in[y * 8 + x] * std::cos((2 * x + 1) * u * pi / 16.0) *
                           std::cos((2 * y + 1) * v * pi / 16.0);
            const double cu = (u == 0) ? std::sqrt(0.5) : 1.0;
            const double cv = (v == 0) ? std::sqrt(0.5) : 1.0;
            out[v * 8 + u] = 0.25 * cu * cv * acc;
        }
}

} // namespace

TEST_CASE("fdct of a zero (level-shifted 128) block is all zero") {
    double in[64], out[64];
    for (auto& v : in) v = 0.0;
    fdct8x8(in, out);
    for (double v : out) CHECK(v == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("fdct DC of a constant 255 block is 1016") {
    double in[64], out[64];
    for (auto& v : in) v = 127.0; // 255 level-shifted
    fdct8x8(in, out);
    CHECK(out[0] == doctest::Approx(1016.0).epsilon(1e-12));
    for (int i = 1; i < 64; ++i) CHECK(std::abs(out[i]) < 1e-9);
}

TEST_CASE("fdct matches the direct-sum oracle; idct inverts it") {
    std::mt19937 rng(123);
    std::uniform_real_distribution<double> dist(-128.0, 127.0);
    for (int trial = 0; trial < 200; ++trial) {
        double in[64], fast[64], ref[64], back[64];
        for (auto& v : in) v = dist(rng);
        fdct8x8(in, fast);
        dct_reference(in, ref);
        for (int i = 0; i < 64; ++i) CHECK(std::abs(fast[i] - ref[i]) < 1e-9);
        idct8x8(fast, back);
        for (int i = 0; i < 64; ++i) CHECK(std::abs(back[i] - in[i]) < 1e-9);
    }
}

TEST_CASE("scale_quant_table endpoints") {
    const auto q50 = scale_quant_table(50);
    for (int i = 0; i < 64; ++i) CHECK(q50[i] == kBaseLumaQuant[i]);
    CHECK(q50[0] == 16);

    const auto q1 = scale_quant_table(1);
    for (int i = 0; i < 64; ++i) CHECK(q1[i] == 255);

    const auto q100 = scale_quant_table(100);
    for (int i = 0; i < 64; ++i) CHECK(q100[i] == 1);

    CHECK_THROWS_AS(scale_quant_table(0), std::invalid_argument);
    CHECK_THROWS_AS(scale_quant_table(101), std::invalid_argument);
}

TEST_CASE("zig-zag is a permutation visiting anti-diagonals") {
    bool seen[64] = {};
    for (int i = 0; i < 64; ++i) {
        REQUIRE(kZigZag[i] >= 0);
        REQUIRE(kZigZag[i] < 64);
        seen[kZigZag[i]] = true;
    }
    for (bool s : seen) CHECK(s);
    CHECK(kZigZag[0] == 0);
    CHECK(kZigZag[1] == 1);
    CHECK(kZigZag[2] == 8);
    CHECK(kZigZag[63] == 63);
}
