#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fairgp/attention.hpp"
#include "fairgp/graph.hpp"
#include "fairgp/partition.hpp"
#include "fairgp/spectral.hpp"

namespace fairgp {

struct ModelParams {
    struct Layer {
        AttentionParams attn;
        FFNParams ffn;
    };
    std::vector<Layer> layers;
    DenseMatrix classifier_w;          // d_out×2
    std::vector<double> classifier_b;  // 2
};

enum class Optimizer { kSgd, kAdam };

struct AblationFlags {
    bool no_fm = false;  // skip the structure-matrix fusion
    bool no_gp = false;  // no partition at all: full unmasked attention
    bool no_ao = false;  // partition computed but attention left unmasked
};

struct TrainConfig {
    std::size_t epochs = 100;
    double lr = 1e-3;
    Optimizer optimizer = Optimizer::kAdam;
    std::uint64_t seed = 0;
    AblationFlags ablations;
    std::size_t hidden = 64;
    std::size_t heads = 1;
    std::size_t num_layers = 1;
    bool scale_by_n = false;
};

enum class PartitionStrategy { kMultilevel, kLouvain, kRandom, kNone };

struct PartitionConfig {
    PartitionStrategy strategy = PartitionStrategy::kMultilevel;
    std::size_t clusters = 0;  // 0 → max(2, n/64)
    double balance_eps = 0.05;
    std::uint64_t seed = 0;
};

struct TrainTrace {
    std::vector<double> train_loss;
    std::optional<Partition> partition;  // computed partition, if any
};

std::size_t default_cluster_count(std::size_t n);

/// Mean negative log-softmax of the target logit, numerically stabilized.
/// Throws on an empty target set or non-binary targets.
double cross_entropy(const DenseMatrix& logits, const std::vector<int>& targets);

/// 0 stays 0, everything >= 1 becomes 1. Negative labels are rejected.
std::vector<int> binarize_labels(const std::vector<int>& raw);

/// Stratified splits: per class, 25% validation and 25% test (floored), then
/// min(ceil(0.5·class size), 1000) of the remainder as train. Classes with
/// fewer than 4 nodes are rejected.
SplitMasks make_splits(const Graph& g, std::uint64_t seed);

/// Model input pipeline shared by train and predict: optional feature fusion,
/// per-column standardization, optional partition.
struct PreparedInputs {
    DenseMatrix x;
    std::optional<Partition> partition;
    bool mask_attention = false;  // whether the attention mask is applied
};
PreparedInputs prepare_inputs(const Graph& g, const TrainConfig& cfg,
                              const PartitionConfig& pcfg, const SpectralConfig& scfg);

/// Full training loop with hand-derived backpropagation. Deterministic given
/// cfg.seed. Throws on divergence (message carries the epoch index).
std::pair<ModelParams, TrainTrace> train(const Graph& g, const TrainConfig& cfg,
                                         const PartitionConfig& pcfg,
                                         const SpectralConfig& scfg);

struct Predictions {
    std::vector<double> prob_class1;
    std::vector<int> labels;  // argmax, ties toward class 0
};
Predictions predict(const Graph& g, const ModelParams& params, const TrainConfig& cfg,
                    const PartitionConfig& pcfg, const SpectralConfig& scfg);

/// Same, reusing already-prepared inputs (skips the eigensolve/partition).
Predictions predict_on(const PreparedInputs& in, const ModelParams& params, bool scale_by_n);

/// A zero-filled parameter set with the same shapes, used as a gradient
/// container.
ModelParams zero_like(const ModelParams& p);

/// Every trainable array of the model, in a fixed order (layer projections,
/// FFN weights and biases, classifier).
std::vector<std::vector<double>*> parameter_arrays(ModelParams& p);

/// One forward/backward evaluation: cross-entropy on the masked rows plus
/// gradients for every parameter. Exposed for the finite-difference checks.
double loss_and_gradients(const DenseMatrix& x, const std::vector<int>& labels,
                          const std::vector<bool>& train_mask, const ModelParams& params,
                          const Partition* mask_partition, double scale, ModelParams* grads);

}  // namespace fairgp
