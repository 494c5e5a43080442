#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "fairgp/dense_matrix.hpp"

namespace fairgp {

using NodeId = std::uint32_t;

/// Disjoint boolean masks selecting train / validation / test nodes.
struct SplitMasks {
    std::vector<bool> train;
    std::vector<bool> val;
    std::vector<bool> test;

    bool empty() const { return train.empty(); }
};

/// Immutable undirected graph in compressed-adjacency form, plus node
/// features, the sensitive attribute column and binary labels. Construction
/// validates everything; afterwards the graph is safe for concurrent reads.
class Graph {
public:
    Graph() = default;

    std::size_t node_count() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
    std::size_t edge_count() const { return neighbors_.size() / 2; }

    std::span<const NodeId> neighbors(NodeId v) const {
        return {neighbors_.data() + offsets_[v], neighbors_.data() + offsets_[v + 1]};
    }

    const DenseMatrix& features() const { return features_; }
    const std::vector<int>& sensitive() const { return sensitive_; }
    const std::vector<int>& labels() const { return labels_; }
    const SplitMasks& masks() const { return masks_; }
    void set_masks(SplitMasks m);
    void set_labels(std::vector<int> labels);

    /// Iterates each undirected edge once as (u, v) with u < v.
    template <typename Fn>
    void for_each_edge(Fn&& fn) const {
        const std::size_t n = node_count();
        for (NodeId u = 0; u < n; ++u)
            for (NodeId v : neighbors(u))
                if (u < v) fn(u, v);
    }

    friend Graph build_graph(const std::vector<std::pair<NodeId, NodeId>>& edge_pairs,
                             DenseMatrix features, std::vector<int> sensitive,
                             std::vector<int> labels);

private:
    std::vector<std::size_t> offsets_;
    std::vector<NodeId> neighbors_;
    DenseMatrix features_;
    std::vector<int> sensitive_;
    std::vector<int> labels_;
    SplitMasks masks_;
};

/// Builds a validated graph: adjacency is symmetrized, duplicate edges and
/// self-loops dropped, neighbor lists sorted ascending. Node count is the
/// feature row count. Throws std::invalid_argument on out-of-range indices or
/// dimension mismatches.
Graph build_graph(const std::vector<std::pair<NodeId, NodeId>>& edge_pairs, DenseMatrix features,
                  std::vector<int> sensitive, std::vector<int> labels);

std::size_t degree(const Graph& g, NodeId v);

/// Nodes with degree strictly greater than threshold.
std::vector<NodeId> higher_order_nodes(const Graph& g, std::size_t threshold);

/// Default higher-order threshold for desk-scale graphs: the 90th-percentile
/// degree (the paper's absolute cutoff assumes much larger graphs).
std::size_t default_higher_order_threshold(const Graph& g);

}  // namespace fairgp
