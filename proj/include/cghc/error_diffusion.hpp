#pragma once

#include "cghc/types.hpp"

namespace cghc {

// Weights for the four diffusion directions: right, down-left, down,
// down-right (row scan order). Must sum to 1.
struct DiffusionKernel {
    double w_right = 7.0 / 16.0;
    double w_down_left = 3.0 / 16.0;
    double w_down = 5.0 / 16.0;
    double w_down_right = 1.0 / 16.0;
};

enum class ScanMode {
    unidirectional, // every row left to right
    bidirectional,  // serpentine; kernel mirrored on right-to-left rows
};

// Sequential complex-to-phase-only conversion: each visited pixel is forced to
// unit magnitude, P = phase(H) at visit time, and the complex residual
// E = H - e^{iP} is pushed onto the four unvisited neighbors with the kernel
// weights. Contributions falling off the grid are discarded. Output phases lie
// in [0, 2*pi).
PhaseMap to_phase_only(const ComplexField& h, const DiffusionKernel& kernel = {},
                       ScanMode mode = ScanMode::unidirectional);

// Baseline without diffusion: P = phase(H) per pixel.
PhaseMap phase_truncate(const ComplexField& h);

} // namespace cghc
