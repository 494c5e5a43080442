#include "fairgp/graph.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace fairgp {

void Graph::set_masks(SplitMasks m) {
    const std::size_t n = node_count();
    if (m.train.size() != n || m.val.size() != n || m.test.size() != n)
        throw std::invalid_argument("set_masks: mask length != node count");
    for (std::size_t i = 0; i < n; ++i) {
        const int in = int(m.train[i]) + int(m.val[i]) + int(m.test[i]);
        if (in > 1) throw std::invalid_argument("set_masks: masks overlap at node " + std::to_string(i));
    }
    masks_ = std::move(m);
}

void Graph::set_labels(std::vector<int> labels) {
    if (labels.size() != node_count())
        throw std::invalid_argument("set_labels: length mismatch");
    labels_ = std::move(labels);
}

Graph build_graph(const std::vector<std::pair<NodeId, NodeId>>& edge_pairs, DenseMatrix features,
                  std::vector<int> sensitive, std::vector<int> labels) {
    const std::size_t n = features.rows();
    if (sensitive.size() != n)
        throw std::invalid_argument("build_graph: sensitive length != feature rows");
    if (labels.size() != n)
        throw std::invalid_argument("build_graph: labels length != feature rows");
    if (!features.all_finite())
        throw std::invalid_argument("build_graph: non-finite feature entry");
    for (int s : sensitive)
        if (s < 0) throw std::invalid_argument("build_graph: negative sensitive value");
    for (int y : labels)
        if (y < 0 || y > 1) throw std::invalid_argument("build_graph: labels must be binary");

    std::vector<std::vector<NodeId>> adj(n);
    for (const auto& [u, v] : edge_pairs) {
        if (u >= n || v >= n)
            throw std::invalid_argument("build_graph: edge index out of range: (" +
                                        std::to_string(u) + "," + std::to_string(v) + ")");
        if (u == v) continue;  // self-loops dropped
        adj[u].push_back(v);
        adj[v].push_back(u);
    }
    for (auto& list : adj) {
        std::sort(list.begin(), list.end());
        list.erase(std::unique(list.begin(), list.end()), list.end());
    }

    Graph g;
    g.offsets_.resize(n + 1, 0);
    for (std::size_t v = 0; v < n; ++v) g.offsets_[v + 1] = g.offsets_[v] + adj[v].size();
    g.neighbors_.reserve(g.offsets_[n]);
    for (const auto& list : adj) g.neighbors_.insert(g.neighbors_.end(), list.begin(), list.end());
    g.features_ = std::move(features);
    g.sensitive_ = std::move(sensitive);
    g.labels_ = std::move(labels);
    g.masks_ = SplitMasks{std::vector<bool>(n, false), std::vector<bool>(n, false),
                          std::vector<bool>(n, false)};
    return g;
}

std::size_t degree(const Graph& g, NodeId v) {
    if (v >= g.node_count()) throw std::invalid_argument("degree: node out of range");
    return g.neighbors(v).size();
}

std::vector<NodeId> higher_order_nodes(const Graph& g, std::size_t threshold) {
    std::vector<NodeId> out;
    for (NodeId v = 0; v < g.node_count(); ++v)
        if (g.neighbors(v).size() > threshold) out.push_back(v);
    return out;
}

std::size_t default_higher_order_threshold(const Graph& g) {
    const std::size_t n = g.node_count();
    if (n == 0) return 0;
    std::vector<std::size_t> degs(n);
    for (NodeId v = 0; v < n; ++v) degs[v] = g.neighbors(v).size();
    std::sort(degs.begin(), degs.end());
    return degs[std::min(n - 1, (n * 9) / 10)];
}

}  // namespace fairgp
