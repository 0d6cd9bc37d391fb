#include "cghc/error_diffusion.hpp"

#include <cmath>
#include <stdexcept>

namespace cghc {

namespace {

inline double phase_of(const std::complex<double>& v) {
    return wrap_phase(std::atan2(v.imag(), v.real()));
}

} // namespace

PhaseMap to_phase_only(const ComplexField& h, const DiffusionKernel& kernel,
                       ScanMode mode) {
    check_field(h);
    const double wsum = kernel.w_right + kernel.w_down_left + kernel.w_down +
                        kernel.w_down_right;
    if (std::abs(wsum - 1.0) > 1e-12)
        throw std::invalid_argument("DiffusionKernel: weights must sum to 1");

    const int rows = h.height;
    const int cols = h.width;
    ComplexField work = h; // running hologram, mutated along the scan
    PhaseMap out(cols, rows, h.pitch);

    for (int r = 0; r < rows; ++r) {
        const bool reversed = (mode == ScanMode::bidirectional) && (r % 2 == 1);
        const int step = reversed ? -1 : 1; // horizontal "forward" direction
        const int c0 = reversed ? cols - 1 : 0;

        for (int i = 0; i < cols; ++i) {
            const int c = c0 + i * step;
            const std::complex<double> cur = work.at(r, c);
            const double phi = phase_of(cur);
            out.at(r, c) = phi;

            const std::complex<double> err =
                cur - std::complex<double>(std::cos(phi), std::sin(phi));

            // right / down-left / down / down-right in scan-local orientation
            const int cr = c + step;
            const int cl = c - step;
            if (cr >= 0 && cr < cols) work.at(r, cr) += kernel.w_right * err;
            if (r + 1 < rows) {
                if (cl >= 0 && cl < cols) work.at(r + 1, cl) += kernel.w_down_left * err;
                work.at(r + 1, c) += kernel.w_down * err;
                if (cr >= 0 && cr < cols) work.at(r + 1, cr) += kernel.w_down_right * err;
            }
        }
    }
    return out;
}

PhaseMap phase_truncate(const ComplexField& h) {
    check_field(h);
    PhaseMap out(h.width, h.height, h.pitch);
    for (size_t i = 0; i < h.data.size(); ++i)
        out.data[i] = phase_of(h.data[i]);
    return out;
}

} // namespace cghc
