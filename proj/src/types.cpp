#include "cghc/types.hpp"

#include <cmath>
#include <stdexcept>

namespace cghc {

void check_field(const ComplexField& f) {
    if (f.width < 1 || f.height < 1)
        throw std::invalid_argument("ComplexField: dimensions must be >= 1");
    if (!(f.pitch > 0.0))
        throw std::invalid_argument("ComplexField: pitch must be positive");
    if (f.data.size() != static_cast<size_t>(f.width) * f.height)
        throw std::invalid_argument("ComplexField: data length != width*height");
    for (const auto& v : f.data)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw std::invalid_argument("ComplexField: non-finite sample");
}

void check_phase_map(const PhaseMap& p) {
    if (p.width < 1 || p.height < 1)
        throw std::invalid_argument("PhaseMap: dimensions must be >= 1");
    if (p.data.size() != static_cast<size_t>(p.width) * p.height)
        throw std::invalid_argument("PhaseMap: data length != width*height");
    for (double v : p.data)
        if (!std::isfinite(v))
            throw std::invalid_argument("PhaseMap: non-finite sample");
}

void check_image(const Gray8Image& g) {
    if (g.width < 1 || g.height < 1)
        throw std::invalid_argument("Gray8Image: dimensions must be >= 1");
    if (g.data.size() != static_cast<size_t>(g.width) * g.height)
        throw std::invalid_argument("Gray8Image: data length != width*height");
}

bool check_optical(const OpticalConfig& cfg) {
    if (!(cfg.wavelength > 0.0) || !(cfg.pitch > 0.0) || !(cfg.distance > 0.0))
        throw std::invalid_argument("OpticalConfig: all parameters must be positive");
    return cfg.distance > 100.0 * cfg.pitch;
}

double wrap_phase(double phi) {
    phi = std::fmod(phi, kTwoPi);
    if (phi < 0.0) phi += kTwoPi;
    if (phi >= kTwoPi) phi = 0.0; // fmod roundoff can land exactly on 2*pi
    return phi;
}

Gray8Image quantize_phase(const PhaseMap& p) {
    check_phase_map(p);
    Gray8Image g(p.width, p.height);
    for (size_t i = 0; i < p.data.size(); ++i) {
        const double phi = wrap_phase(p.data[i]);
        const long q = std::lround(phi * 256.0 / kTwoPi); // half away from zero
        g.data[i] = static_cast<uint8_t>(q & 255);        // 256 wraps to 0
    }
    return g;
}

PhaseMap dequantize_phase(const Gray8Image& g, double pitch) {
    check_image(g);
    PhaseMap p(g.width, g.height, pitch);
    for (size_t i = 0; i < g.data.size(); ++i)
        p.data[i] = g.data[i] * (kTwoPi / 256.0);
    return p;
}

} // namespace cghc
