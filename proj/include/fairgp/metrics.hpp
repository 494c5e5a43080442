#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "fairgp/dense_matrix.hpp"
#include "fairgp/graph.hpp"

namespace fairgp {

/// Evaluation bundle for one run. Metrics that are undefined on the instance
/// (an empty sensitive group, a single-class mask) stay unset rather than
/// being coerced to zero.
struct MetricsReport {
    std::optional<double> acc;
    std::optional<double> auc;
    std::optional<double> delta_sp;
    std::optional<double> delta_eo;
    std::optional<double> delta_sp_multi;  // variance form, set when s has > 2 classes
    std::optional<double> delta_eo_multi;
    std::optional<double> positive_rate_s0;
    std::optional<double> positive_rate_s1;
    std::optional<double> sensitive_similarity;  // of the trained model's scores
    std::optional<double> theorem1_margin;       // rhs - lhs on those scores
    std::optional<double> lemma1_margin;
};

/// Normalized majority/minority ratio pair: the smaller side is 1, the other
/// is >= 1. Unset when a slice is empty or a rate denominator is zero.
struct RatioPair {
    std::optional<double> ratio_s1;
    std::optional<double> ratio_s0;
};

/// The three ratio pairs of the empirical-observation table: sensitive counts
/// over all nodes, over higher-order nodes, and conditional positive rates of
/// the predictions.
struct ProportionTable {
    RatioPair all_nodes;
    RatioPair higher_order;
    RatioPair prediction;
};

/// |P(pred=1 | s=0) - P(pred=1 | s=1)| over masked nodes. Empty mask →
/// uses all nodes. Unset when either group is empty.
std::optional<double> delta_sp(const std::vector<int>& pred, const std::vector<int>& sensitive,
                               const std::vector<bool>& mask = {});

/// |P(pred=1 | y=1, s=0) - P(pred=1 | y=1, s=1)|. Unset when a group has no
/// positive ground-truth nodes.
std::optional<double> delta_eo(const std::vector<int>& pred, const std::vector<int>& labels,
                               const std::vector<int>& sensitive,
                               const std::vector<bool>& mask = {});

/// Multi-class variants: population variance of the per-group rates.
std::optional<double> delta_sp_multi(const std::vector<int>& pred,
                                     const std::vector<int>& sensitive,
                                     const std::vector<bool>& mask = {});
std::optional<double> delta_eo_multi(const std::vector<int>& pred, const std::vector<int>& labels,
                                     const std::vector<int>& sensitive,
                                     const std::vector<bool>& mask = {});

/// Rank-based Mann-Whitney AUC; ties contribute 1/2. Unset when the mask
/// holds a single class.
std::optional<double> auc(const std::vector<double>& prob, const std::vector<int>& labels,
                          const std::vector<bool>& mask = {});

double accuracy(const std::vector<int>& pred, const std::vector<int>& labels,
                const std::vector<bool>& mask = {});

/// ||s - A_hat·s||_2, the distance between the sensitive vector and its image
/// under attention.
double sensitive_similarity(const DenseMatrix& a_hat, const std::vector<int>& sensitive);

/// Builds the three normalized proportion pairs; higher-order nodes are those
/// with degree > threshold.
ProportionTable proportion_table(const Graph& g, const std::vector<int>& pred,
                                 std::size_t threshold);

}  // namespace fairgp
