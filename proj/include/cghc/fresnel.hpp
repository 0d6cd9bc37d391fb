#pragma once

#include <vector>

#include "cghc/types.hpp"

namespace cghc {

enum class Direction { forward, inverse };

// Frequency-domain Fresnel kernel exp(i2πz/λ)·exp(-iπλz(fx²+fy²)) sampled on
// the FFT grid of a width x height field with the given pitch. Pure phase:
// |data[k]| == 1 for every sample, and even under (fx,fy) -> (-fx,-fy).
struct TransferFunction {
    int width = 0;
    int height = 0;
    std::vector<std::complex<double>> data;
};

TransferFunction make_fresnel_tf(int width, int height, double pitch,
                                 double wavelength, double z);

// Largest alias-free frequency of the sampled kernel: |f| <= N*pitch/(2*λ*z)
// per axis (N*pitch is the grid extent). Returned per-axis in cycles/m.
double fresnel_band_limit(int n, double pitch, double wavelength, double z);

// Spectral weight per FFT-grid sample: 1 over the inner part of the alias-free
// band, a raised-cosine rolloff across its outer fraction, 0 beyond the limit.
// The smooth edge keeps truncation ringing out of the propagated field.
std::vector<double> band_limit_mask(int width, int height, double pitch,
                                    double wavelength, double z);

// Fresnel propagation over distance cfg.distance (inverse negates z):
// zero-pad to 2x each dimension, FFT, multiply by the band-limited transfer
// function, inverse FFT, center crop. Energy of in-band content is conserved.
// Rejects non-finite samples and dimensions < 8.
ComplexField propagate(const ComplexField& u, const OpticalConfig& cfg,
                       Direction direction);

// Same computation without the final crop; the returned field is the full
// 2W x 2H padded plane (diagnostic / test surface).
ComplexField propagate_padded(const ComplexField& u, const OpticalConfig& cfg,
                              Direction direction);

// Object amplitude (gray/255, zero phase) centered on a zero canvas, then
// propagated forward to the hologram plane.
ComplexField synthesize_hologram(const Gray8Image& object, const OpticalConfig& cfg,
                                 int canvas_width, int canvas_height);

// exp(iP) propagated back over -z; per-sample magnitude, center crop, linear
// min/max normalization to [0,255]. A flat magnitude crop (max == min) yields
// an all-zero image and sets *degenerate when provided.
Gray8Image reconstruct(const PhaseMap& p, const OpticalConfig& cfg,
                       int crop_width, int crop_height, bool* degenerate = nullptr);

} // namespace cghc
