#pragma once

#include <cstddef>

#include "cghc/types.hpp"

namespace cghc {

// PSNR sentinel reported for identical images (zero MSE).
inline constexpr double kPsnrCap = 99.0;

struct QualityReport {
    double psnr_db = 0.0;
    double ssim = 0.0;
    double compression_ratio = 0.0;
    size_t raw_bytes = 0;
    size_t compressed_bytes = 0;
};

// 10*log10(255^2 / MSE), capped at 99 dB for identical inputs.
double psnr(const Gray8Image& a, const Gray8Image& b);

// Mean local SSIM: 11x11 Gaussian window (sigma 1.5), K1=0.01, K2=0.03,
// L=255, valid-window aggregation. Requires dimensions >= 11x11.
double ssim(const Gray8Image& a, const Gray8Image& b);

double compression_ratio(size_t raw_bytes, size_t compressed_bytes);

} // namespace cghc
