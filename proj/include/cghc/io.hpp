#pragma once

#include <string>

#include "cghc/types.hpp"

namespace cghc {

// Binary portable graymap (P5), maxval 255 only.
Gray8Image load_pgm(const std::string& path);
void save_pgm(const Gray8Image& img, const std::string& path);

// Complex-field container:
//   magic "CGHF", LE u32 width, u32 height, f64 pitch,
//   then width*height (re, im) f64 pairs, row-major.
ComplexField load_field(const std::string& path);
void save_field(const ComplexField& f, const std::string& path);

// Phase-map container: magic "CGHP", same layout, one f64 per sample.
PhaseMap load_phase_map(const std::string& path);
void save_phase_map(const PhaseMap& p, const std::string& path);

} // namespace cghc
