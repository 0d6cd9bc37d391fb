#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cghc/cnn.hpp"
#include "cghc/config.hpp"
#include "cghc/manifest.hpp"
#include "cghc/types.hpp"

namespace cghc {

// Deterministic procedurally generated test object: smooth background with
// soft-edged shapes, full gray range.
Gray8Image make_synthetic_object(int size, uint64_t seed);

// Directory name for one propagation distance, e.g. 0.3 -> "z0300mm".
std::string distance_dir_name(double z_m);

struct EvalRow {
    std::string object;
    double distance_m = 0.0;
    double compression_ratio = 0.0;
    double psnr_compressed_db = 0.0;
    double ssim_compressed = 0.0;
    double psnr_restored_db = 0.0;
    double ssim_restored = 0.0;
};

std::string eval_csv_header();
std::string eval_csv_row(const EvalRow& row);

struct PipelineResult {
    std::vector<EvalRow> rows;
    std::string report_path;
    std::string manifest_path;
};

// --- individual stages (also exposed as CLI subcommands) ---

// Object image -> complex hologram (CGHF), phase-only hologram (CGHP) and its
// 8-bit quantization (PGM) under <out_dir>/<zdir>/{field,phase,clean}/<stem>.*.
struct GenerateOutputs {
    std::string field_path;
    std::string phase_path;
    std::string clean_path;
};
GenerateOutputs stage_generate(const ExperimentConfig& cfg, const Gray8Image& object,
                               double z, const std::string& out_dir,
                               const std::string& stem);

// Quantized phase map -> JFIF at cfg.jpeg_quality plus its decoded image,
// under <out_dir>/<zdir>/{jpeg,decoded}/<stem>.*.
struct CompressOutputs {
    std::string jpeg_path;
    std::string decoded_path;
    size_t raw_bytes = 0;
    size_t stream_bytes = 0;
    double ratio = 0.0;
};
CompressOutputs stage_compress(const ExperimentConfig& cfg,
                               const std::string& clean_pgm_path, double z,
                               const std::string& out_dir, const std::string& stem);

// Train the per-distance restoration model from (decoded, clean) pairs found
// in <out_dir>/<zdir>; writes model.arcn and train_loss.csv there.
struct TrainOutputs {
    std::string model_path;
    std::string loss_csv_path;
};
TrainOutputs stage_train(const ExperimentConfig& cfg, double z,
                         const std::string& out_dir,
                         const std::vector<std::string>& stems);

// Restore + reconstruct the evaluation triplet for one test hologram and
// compute quality metrics against the uncompressed-hologram reconstruction.
EvalRow stage_evaluate(const ExperimentConfig& cfg, const CnnModel& model, double z,
                       const std::string& out_dir, const std::string& stem,
                       double ratio);

// Full run: generate -> compress -> train -> evaluate for every configured
// distance; writes report.csv, manifest.txt and timings.txt under cfg.out_dir.
// Stages whose recorded fingerprints and artifact hashes still match are
// skipped on rerun. `log` may be null.
PipelineResult run_pipeline(const ExperimentConfig& cfg, std::ostream* log = nullptr);

} // namespace cghc
