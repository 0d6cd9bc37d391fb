#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cghc/types.hpp"

namespace cghc {

inline constexpr int kPatchSize = 31;

enum class Activation : uint32_t { identity = 0, rectifier = 1 };

// 2D convolution layer, same padding. Weights are stored row-major over
// [ky][kx][in_channel][out_channel]; biases one per output channel.
struct ConvLayer {
    int kh = 0, kw = 0;
    int cin = 0, cout = 0;
    Activation act = Activation::identity;
    std::vector<double> weights;
    std::vector<double> biases;

    size_t weight_count() const {
        return static_cast<size_t>(kh) * kw * cin * cout;
    }
    size_t weight_index(int ky, int kx, int ci, int o) const {
        return ((static_cast<size_t>(ky) * kw + kx) * cin + ci) * cout + o;
    }
};

struct CnnModel {
    std::vector<ConvLayer> layers;
    double distance_tag = 0.0; // propagation distance this model was trained for [m]
};

// Throws std::invalid_argument on inconsistent shapes, broken channel
// chaining, or non-finite parameters.
void check_model(const CnnModel& m);

// Four-layer artifact-reduction network: 9x9 feature extraction, 7x7 feature
// enhancement, 1x1 non-linear mapping, 5x5 reconstruction; rectifiers on all
// but the last layer. Channel widths default to 64/32/16. Weights are
// zero-mean Gaussian (sigma init_std, init_std_last for the final layer),
// biases zero, drawn deterministically from the seed. With identity_path a
// centered delta through channel 0 is added at every layer so the untrained
// network starts out as (approximately) the identity map; training then only
// has to learn the artifact correction.
CnnModel make_arcnn(double distance_tag, uint64_t seed, int c1 = 64, int c2 = 32,
                    int c3 = 16, double init_std = 0.01, double init_std_last = 0.001,
                    bool identity_path = false);

// Single-channel image stored row-major, values nominally in [0,1].
struct ImageF {
    int width = 0;
    int height = 0;
    std::vector<double> data;
};

// Same-padding forward pass over a single-channel image of any size >= 1.
ImageF forward(const CnnModel& m, const ImageF& input);

// Co-located 31x31 input/target patch, values scaled to [0,1].
struct PatchPair {
    std::vector<double> input;  // from the compressed hologram
    std::vector<double> target; // from the uncompressed hologram
};

// Tile both images at the given stride; with augment each base pair expands
// into its 8 dihedral variants (4 rotations x 2 mirror states), the same
// transform applied to both members.
std::vector<PatchPair> extract_patches(const Gray8Image& compressed,
                                       const Gray8Image& clean, int stride,
                                       bool augment);

// Per-layer parameter gradients, shapes mirroring the model.
struct LayerGrad {
    std::vector<double> weights;
    std::vector<double> biases;
};
using ModelGrad = std::vector<LayerGrad>;

// MSE over batch and pixels plus backpropagated gradients for every parameter.
double loss_and_gradients(const CnnModel& m, const std::vector<PatchPair>& batch,
                          ModelGrad& grad);

// Forward-only batch MSE (finite-difference and validation probes).
double batch_loss(const CnnModel& m, const std::vector<PatchPair>& batch);

struct TrainConfig {
    double learning_rate = 1e-3;     // layers 1..n-1
    double last_layer_lr_scale = 0.1; // final layer trains 10x slower
    double momentum = 0.9;
    int batch_size = 64;
    int iterations = 20000;
    uint64_t seed = 1;

    // plateau-driven halving of the learning rate; val_size = 0 disables it
    int val_size = 0;        // pairs held out of training for validation
    int val_interval = 50;   // iterations between validation probes
    int plateau_patience = 4;
    double min_lr_scale = 1.0 / 64.0;
};

void check_train_config(const TrainConfig& cfg);

struct TrainResult {
    CnnModel model;
    std::vector<double> loss_trace;                 // per-iteration training loss
    std::vector<std::pair<int, double>> val_trace;  // (iteration, validation loss)
};

// SGD with momentum on shuffled mini-batches. Deterministic for a fixed seed.
// Throws std::runtime_error when the loss turns non-finite.
TrainResult train(const CnnModel& initial, const std::vector<PatchPair>& pairs,
                  const TrainConfig& cfg);

// Pad to a multiple of 31 by edge replication, run the network on
// non-overlapping tiles, stitch, crop, clamp to [0,255].
Gray8Image restore(const CnnModel& m, const Gray8Image& hologram);

// Model container ("ARCN", little-endian, f64 parameters). Lossless round trip.
void save_model(const CnnModel& m, const std::string& path);
CnnModel load_model(const std::string& path);

} // namespace cghc
