#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cghc/error_diffusion.hpp"

namespace cghc {

// Full experiment description. Defaults reproduce the reference simulation
// setup: 532 nm illumination, 8 um pixels, 0.3/0.5 m distances, 1024x1024
// holograms from 512x512 objects, JPEG quality 1. The desk_scale flag shrinks
// the geometry to 256x256 / 128x128 for fast runs.
struct ExperimentConfig {
    double wavelength = 532e-9;
    double pitch = 8e-6;
    std::vector<double> distances = {0.3, 0.5};
    int hologram_size = 1024;
    int object_size = 512;
    int jpeg_quality = 1;
    ScanMode scan_mode = ScanMode::bidirectional;

    // training
    double learning_rate = 1e-3;
    double momentum = 0.9;
    int batch_size = 64;
    int iterations = 20000;
    int patch_stride = 9;
    bool augment = true;
    int val_size = 128;
    int val_interval = 50;
    int arcnn_c1 = 64, arcnn_c2 = 32, arcnn_c3 = 16;
    double init_std = 0.01;
    double init_std_last = 0.001;
    bool identity_init = true; // seed the network with an identity path

    uint64_t seed = 1234;
    bool desk_scale = false;

    std::string train_dir;
    std::string test_dir;
    std::string out_dir = "out";

    int hologram_px() const { return desk_scale ? 256 : hologram_size; }
    int object_px() const { return desk_scale ? 128 : object_size; }
};

// Flat key = value file; '#' starts a comment. Unknown keys are rejected.
ExperimentConfig load_config(const std::string& path);

// Apply one "key=value" override (CLI flags win over file values).
void apply_config_override(ExperimentConfig& cfg, const std::string& key,
                           const std::string& value);

// Canonical text form: every key on its own line, deterministic order and
// formatting. Written into run manifests so reruns can be compared.
std::string serialize_config(const ExperimentConfig& cfg);

void check_config(const ExperimentConfig& cfg);

} // namespace cghc
