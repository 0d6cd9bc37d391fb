#include "cghc/metrics.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace cghc {

double psnr(const Gray8Image& a, const Gray8Image& b) {
    check_image(a);
    check_image(b);
    if (a.width != b.width || a.height != b.height)
        throw std::invalid_argument("psnr: dimension mismatch");

    double sse = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) {
        const double d = static_cast<double>(a.data[i]) - b.data[i];
        sse += d * d;
    }
    if (sse == 0.0) return kPsnrCap;
    const double mse = sse / static_cast<double>(a.data.size());
    return 10.0 * std::log10(255.0 * 255.0 / mse);
}

namespace {

constexpr int kWin = 11;

std::array<double, kWin> gaussian_window() {
    std::array<double, kWin> w{};
    const double sigma = 1.5;
    double sum = 0.0;
    for (int i = 0; i < kWin; ++i) {
        const double x = i - (kWin - 1) / 2.0;
        w[i] = std::exp(-x * x / (2.0 * sigma * sigma));
        sum += w[i];
    }
    for (auto& v : w) v /= sum;
    return w;
}

// Separable valid-mode Gaussian filter producing (h-10) x (w-10) output.
std::vector<double> gauss_valid(const std::vector<double>& img, int w, int h) {
    static const std::array<double, kWin> g = gaussian_window();
    const int ow = w - kWin + 1;
    const int oh = h - kWin + 1;
    std::vector<double> rows(static_cast<size_t>(ow) * h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int k = 0; k < kWin; ++k) acc += g[k] * img[static_cast<size_t>(y) * w + x + k];
            rows[static_cast<size_t>(y) * ow + x] = acc;
        }
    std::vector<double> out(static_cast<size_t>(ow) * oh);
    for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int k = 0; k < kWin; ++k) acc += g[k] * rows[static_cast<size_t>(y + k) * ow + x];
            out[static_cast<size_t>(y) * ow + x] = acc;
        }
    return out;
}

} // namespace

double ssim(const Gray8Image& a, const Gray8Image& b) {
    check_image(a);
    check_image(b);
    if (a.width != b.width || a.height != b.height)
        throw std::invalid_argument("ssim: dimension mismatch");
    if (a.width < kWin || a.height < kWin)
        throw std::invalid_argument("ssim: images must be at least 11x11");

    const int w = a.width, h = a.height;
    const size_t n = a.data.size();
    std::vector<double> fa(n), fb(n), faa(n), fbb(n), fab(n);
    for (size_t i = 0; i < n; ++i) {
        const double x = a.data[i];
        const double y = b.data[i];
        fa[i] = x;
        fb[i] = y;
        faa[i] = x * x;
        fbb[i] = y * y;
        fab[i] = x * y;
    }

    const auto mu1 = gauss_valid(fa, w, h);
    const auto mu2 = gauss_valid(fb, w, h);
    const auto s11 = gauss_valid(faa, w, h);
    const auto s22 = gauss_valid(fbb, w, h);
    const auto s12 = gauss_valid(fab, w, h);

    const double c1 = (0.01 * 255.0) * (0.01 * 255.0);
    const double c2 = (0.03 * 255.0) * (0.03 * 255.0);

    double acc = 0.0;
    for (size_t i = 0; i < mu1.size(); ++i) {
        const double m1 = mu1[i], m2 = mu2[i];
        const double var1 = s11[i] - m1 * m1;
        const double var2 = s22[i] - m2 * m2;
        const double cov = s12[i] - m1 * m2;
        acc += ((2.0 * m1 * m2 + c1) * (2.0 * cov + c2)) /
               ((m1 * m1 + m2 * m2 + c1) * (var1 + var2 + c2));
    }
    return acc / static_cast<double>(mu1.size());
}

double compression_ratio(size_t raw_bytes, size_t compressed_bytes) {
    if (raw_bytes == 0)
        throw std::invalid_argument("compression_ratio: raw size must be positive");
    if (compressed_bytes == 0)
        throw std::invalid_argument("compression_ratio: empty stream");
    return static_cast<double>(raw_bytes) / static_cast<double>(compressed_bytes);
}

} // namespace cghc
