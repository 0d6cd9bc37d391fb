#include "cghc/fresnel.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>

namespace cghc {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

// fftw_plan_* is not reentrant; execution is.
std::mutex g_plan_mutex;

void fft2d_inplace(std::complex<double>* data, int width, int height, int sign) {
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(g_plan_mutex);
        plan = fftw_plan_dft_2d(height, width,
                                reinterpret_cast<fftw_complex*>(data),
                                reinterpret_cast<fftw_complex*>(data),
                                sign, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(g_plan_mutex);
        fftw_destroy_plan(plan);
    }
}

// FFT-grid frequency for bin k of an n-point axis with sample spacing d.
inline double fft_freq(int k, int n, double d) {
    const int s = (k <= n / 2) ? k : k - n;
    return s / (n * d);
}

} // namespace

TransferFunction make_fresnel_tf(int width, int height, double pitch,
                                 double wavelength, double z) {
    TransferFunction tf;
    tf.width = width;
    tf.height = height;
    tf.data.resize(static_cast<size_t>(width) * height);

    const double piLz = kPi * wavelength * z;
    const double global = kTwoPi * z / wavelength; // exp(i 2πz/λ) carrier term
    for (int ky = 0; ky < height; ++ky) {
        const double fy = fft_freq(ky, height, pitch);
        for (int kx = 0; kx < width; ++kx) {
            const double fx = fft_freq(kx, width, pitch);
            const double phase = global - piLz * (fx * fx + fy * fy);
            tf.data[static_cast<size_t>(ky) * width + kx] =
                std::complex<double>(std::cos(phase), std::sin(phase));
        }
    }
    return tf;
}

double fresnel_band_limit(int n, double pitch, double wavelength, double z) {
    return n * pitch / (2.0 * wavelength * std::abs(z));
}

namespace {

// flat fraction of the alias-free band; the outer 1-kFlat rolls off smoothly
constexpr double kFlat = 0.5;

double tukey_axis(double f, double fmax) {
    const double a = std::abs(f);
    if (a <= kFlat * fmax) return 1.0;
    if (a >= fmax) return 0.0;
    const double t = (a - kFlat * fmax) / ((1.0 - kFlat) * fmax);
    return 0.5 * (1.0 + std::cos(kPi * t));
}

} // namespace

std::vector<double> band_limit_mask(int width, int height, double pitch,
                                    double wavelength, double z) {
    const double fmax_x = fresnel_band_limit(width, pitch, wavelength, z);
    const double fmax_y = fresnel_band_limit(height, pitch, wavelength, z);
    std::vector<double> mask(static_cast<size_t>(width) * height);
    for (int ky = 0; ky < height; ++ky) {
        const double wy = tukey_axis(fft_freq(ky, height, pitch), fmax_y);
        for (int kx = 0; kx < width; ++kx) {
            const double wx = tukey_axis(fft_freq(kx, width, pitch), fmax_x);
            mask[static_cast<size_t>(ky) * width + kx] = wx * wy;
        }
    }
    return mask;
}

namespace {

ComplexField propagate_impl(const ComplexField& u, const OpticalConfig& cfg,
                            Direction direction, bool crop) {
    check_field(u);
    check_optical(cfg);
    if (u.width < 8 || u.height < 8)
        throw std::invalid_argument("propagate: dimensions must be >= 8");

    const int pw = 2 * u.width;
    const int ph = 2 * u.height;
    const int ox = u.width / 2;  // centered embedding
    const int oy = u.height / 2;

    ComplexField padded(pw, ph, cfg.pitch);
    for (int r = 0; r < u.height; ++r)
        for (int c = 0; c < u.width; ++c)
            padded.at(oy + r, ox + c) = u.at(r, c);

    fft2d_inplace(padded.data.data(), pw, ph, FFTW_FORWARD);

    const TransferFunction tf = make_fresnel_tf(pw, ph, cfg.pitch, cfg.wavelength,
                                                cfg.distance);
    const auto mask = band_limit_mask(pw, ph, cfg.pitch, cfg.wavelength, cfg.distance);
    const bool conj = (direction == Direction::inverse);
    for (size_t i = 0; i < padded.data.size(); ++i) {
        if (mask[i] == 0.0) {
            padded.data[i] = 0.0;
            continue;
        }
        const std::complex<double> h = conj ? std::conj(tf.data[i]) : tf.data[i];
        padded.data[i] *= mask[i] * h;
    }

    fft2d_inplace(padded.data.data(), pw, ph, FFTW_BACKWARD);
    const double norm = 1.0 / (static_cast<double>(pw) * ph);
    for (auto& v : padded.data) v *= norm;

    if (!crop) return padded;

    ComplexField out(u.width, u.height, cfg.pitch);
    for (int r = 0; r < u.height; ++r)
        for (int c = 0; c < u.width; ++c)
            out.at(r, c) = padded.at(oy + r, ox + c);
    return out;
}

} // namespace

ComplexField propagate(const ComplexField& u, const OpticalConfig& cfg,
                       Direction direction) {
    return propagate_impl(u, cfg, direction, true);
}

ComplexField propagate_padded(const ComplexField& u, const OpticalConfig& cfg,
                              Direction direction) {
    return propagate_impl(u, cfg, direction, false);
}

ComplexField synthesize_hologram(const Gray8Image& object, const OpticalConfig& cfg,
                                 int canvas_width, int canvas_height) {
    check_image(object);
    if (canvas_width < object.width || canvas_height < object.height)
        throw std::invalid_argument("synthesize_hologram: canvas smaller than object");

    ComplexField field(canvas_width, canvas_height, cfg.pitch);
    const int ox = (canvas_width - object.width) / 2;
    const int oy = (canvas_height - object.height) / 2;
    for (int r = 0; r < object.height; ++r)
        for (int c = 0; c < object.width; ++c)
            field.at(oy + r, ox + c) = object.at(r, c) / 255.0;

    return propagate(field, cfg, Direction::forward);
}

Gray8Image reconstruct(const PhaseMap& p, const OpticalConfig& cfg,
                       int crop_width, int crop_height, bool* degenerate) {
    check_phase_map(p);
    if (crop_width > p.width || crop_height > p.height)
        throw std::invalid_argument("reconstruct: crop larger than phase map");
    if (crop_width < 1 || crop_height < 1)
        throw std::invalid_argument("reconstruct: empty crop");

    ComplexField field(p.width, p.height, cfg.pitch);
    for (size_t i = 0; i < p.data.size(); ++i)
        field.data[i] = std::complex<double>(std::cos(p.data[i]), std::sin(p.data[i]));

    const ComplexField back = propagate(field, cfg, Direction::inverse);

    const int ox = (p.width - crop_width) / 2;
    const int oy = (p.height - crop_height) / 2;
    std::vector<double> mag(static_cast<size_t>(crop_width) * crop_height);
    double lo = std::abs(back.at(oy, ox)), hi = lo;
    for (int r = 0; r < crop_height; ++r)
        for (int c = 0; c < crop_width; ++c) {
            const double m = std::abs(back.at(oy + r, ox + c));
            mag[static_cast<size_t>(r) * crop_width + c] = m;
            lo = std::min(lo, m);
            hi = std::max(hi, m);
        }

    Gray8Image img(crop_width, crop_height);
    if (degenerate) *degenerate = false;
    if (!(hi > lo)) {
        if (degenerate) *degenerate = true;
        return img; // all zero
    }
    const double scale = 255.0 / (hi - lo);
    for (size_t i = 0; i < mag.size(); ++i)
        img.data[i] = static_cast<uint8_t>(std::lround((mag[i] - lo) * scale));
    return img;
}

} // namespace cghc
