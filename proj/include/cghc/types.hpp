#pragma once

#include <complex>
#include <cstdint>
#include <vector>

namespace cghc {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// 2D grid of complex amplitudes, row-major, square pixels of size `pitch` [m].
struct ComplexField {
    int width = 0;
    int height = 0;
    double pitch = 0.0;
    std::vector<std::complex<double>> data;

    ComplexField() = default;
    ComplexField(int w, int h, double pitch_m)
        : width(w), height(h), pitch(pitch_m),
          data(static_cast<size_t>(w) * h) {}

    std::complex<double>& at(int row, int col) {
        return data[static_cast<size_t>(row) * width + col];
    }
    const std::complex<double>& at(int row, int col) const {
        return data[static_cast<size_t>(row) * width + col];
    }
    size_t size() const { return data.size(); }
};

// 2D grid of phase values in [0, 2*pi), row-major.
struct PhaseMap {
    int width = 0;
    int height = 0;
    double pitch = 0.0;
    std::vector<double> data;

    PhaseMap() = default;
    PhaseMap(int w, int h, double pitch_m)
        : width(w), height(h), pitch(pitch_m),
          data(static_cast<size_t>(w) * h, 0.0) {}

    double& at(int row, int col) {
        return data[static_cast<size_t>(row) * width + col];
    }
    double at(int row, int col) const {
        return data[static_cast<size_t>(row) * width + col];
    }
    size_t size() const { return data.size(); }
};

// 8-bit grayscale image, row-major.
struct Gray8Image {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> data;

    Gray8Image() = default;
    Gray8Image(int w, int h, uint8_t fill = 0)
        : width(w), height(h), data(static_cast<size_t>(w) * h, fill) {}

    uint8_t& at(int row, int col) {
        return data[static_cast<size_t>(row) * width + col];
    }
    uint8_t at(int row, int col) const {
        return data[static_cast<size_t>(row) * width + col];
    }
    size_t size() const { return data.size(); }
};

// Illumination wavelength, sample pitch and propagation distance, all in meters.
struct OpticalConfig {
    double wavelength = 532e-9;
    double pitch = 8e-6;
    double distance = 0.3;
};

// Throw std::invalid_argument on violated invariants. `check_optical` returns
// true when the geometry is comfortably inside the Fresnel regime (z >> pitch);
// a false return is a warning condition, not an error.
void check_field(const ComplexField& f);
void check_phase_map(const PhaseMap& p);
void check_image(const Gray8Image& g);
bool check_optical(const OpticalConfig& cfg);

// Map [0, 2*pi) onto the 256 gray levels: g = round(phi * 256 / 2pi) mod 256,
// half away from zero. Inputs are renormalized into [0, 2*pi) first.
Gray8Image quantize_phase(const PhaseMap& p);

// Inverse mapping phi = g * 2pi / 256; exact on the 256 representable phases.
PhaseMap dequantize_phase(const Gray8Image& g, double pitch);

// Reduce an arbitrary phase into [0, 2*pi).
double wrap_phase(double phi);

} // namespace cghc
