#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fairgp/dense_matrix.hpp"
#include "fairgp/partition.hpp"

namespace fairgp {

/// Projection weights for one attention layer. Bias terms are omitted in the
/// projections; the FFN keeps its biases.
struct AttentionParams {
    DenseMatrix w_q;  // d_in×d_k
    DenseMatrix w_k;  // d_in×d_k
    DenseMatrix w_v;  // d_in×d_v
    std::size_t heads = 1;
};

/// Two-layer position-wise MLP; the layer output is mlp(z) + z (residual from
/// the attention aggregate), so d_out must equal d_v.
struct FFNParams {
    DenseMatrix w1;          // d_v×d_ff
    std::vector<double> b1;  // d_ff
    DenseMatrix w2;          // d_ff×d_out
    std::vector<double> b2;  // d_out
};

/// Row-stochastic attention score matrix. When masked, entries across
/// clusters are exactly zero.
struct AttentionScores {
    DenseMatrix matrix;
    bool masked = false;
    std::optional<Partition> partition;
};

/// Attended (query, key) pair counter; the FLOP cost of the score kernel is
/// proportional to it (sum of squared cluster sizes when masked, n^2 when not).
struct AttentionCost {
    std::uint64_t pairs = 0;
};

/// Intermediate activations of one layer, retained for backpropagation.
struct LayerCache {
    DenseMatrix q, k, v;
    std::vector<DenseMatrix> head_scores;
    DenseMatrix z;    // concatenated head outputs (n×d_v)
    DenseMatrix a1;   // z·w1 + b1, pre-relu
    DenseMatrix out;  // mlp(z) + z
};

/// Default softmax temperature: sqrt(d_k per head).
double default_scale(const AttentionParams& p);

/// Row-wise Softmax(Q·Kᵀ/scale) over the whole node set, numerically
/// stabilized. Uses the projection matrices whole (single-head view); the
/// multi-head split only affects forward().
AttentionScores attention_scores(const DenseMatrix& x, const AttentionParams& p, double scale,
                                 AttentionCost* cost = nullptr);

/// Same, but logits between different clusters are -inf before the softmax:
/// intra-cluster rows renormalize to one and inter-cluster entries are
/// bit-zero.
AttentionScores masked_attention_scores(const DenseMatrix& x, const AttentionParams& p,
                                        const Partition& partition, double scale,
                                        AttentionCost* cost = nullptr);

/// The analysis-only approximation: co-clustered entries copy the full
/// scores; entries across clusters p,q become alpha_pq/(n/c) with alpha the
/// row-softmax of mean-pooled cluster-level Q/K logits. Requires an exactly
/// balanced partition and an unmasked input. Generally not row-stochastic.
DenseMatrix approx_partitioned_scores(const AttentionScores& full, const Partition& partition,
                                      const DenseMatrix& x, const AttentionParams& p,
                                      double scale);

/// One transformer layer: multi-head masked or full attention, concatenated
/// head outputs, then the residual MLP. Output is n×d_out.
DenseMatrix forward(const DenseMatrix& x, const AttentionParams& p, const FFNParams& ffn,
                    const Partition* partition, double scale, AttentionCost* cost = nullptr,
                    LayerCache* cache = nullptr);

namespace detail {

/// Products restricted to co-clustered index pairs; entries across clusters
/// are treated as (and produced as) exact zeros. These keep the masked path
/// at sum-of-squared-cluster-sizes cost instead of n^2.
DenseMatrix block_av(const DenseMatrix& scores, const DenseMatrix& v, const Partition& part);
DenseMatrix block_outer(const DenseMatrix& dz, const DenseMatrix& v, const Partition& part);
DenseMatrix block_atv(const DenseMatrix& scores, const DenseMatrix& dz, const Partition& part);

}  // namespace detail

}  // namespace fairgp
