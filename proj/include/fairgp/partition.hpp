#pragma once

#include <cstdint>
#include <vector>

#include "fairgp/graph.hpp"

namespace fairgp {

/// Node-to-cluster assignment covering every node exactly once, no empty
/// cluster, cluster ids dense in [0, c).
struct Partition {
    std::vector<int> assignment;
    std::size_t c = 0;
    std::vector<std::size_t> sizes;
    /// Multilevel only: whether the requested balance bound was met (the
    /// bound can be infeasible when c does not divide n and eps is small; the
    /// partition returned is then best-effort).
    bool balance_achieved = true;
};

struct PartitionQuality {
    std::size_t edge_cut = 0;
    double balance = 1.0;  // max cluster size / (n/c)
};

/// Per-level refinement trace: cut after each FM pass, outermost = coarsest
/// level. Used to assert the passes never increase the cut.
struct MultilevelStats {
    std::vector<std::vector<std::size_t>> pass_cuts_per_level;
};

/// METIS-style multilevel partitioning: heavy-edge-matching coarsening until
/// max(8c, 64) nodes, greedy graph-growing initial partition, boundary
/// Fiduccia-Mattheyses refinement projected back through the levels.
/// Deterministic given the seed (all tie-breaks by lowest node id).
Partition partition_multilevel(const Graph& g, std::size_t c, double balance_eps,
                               std::uint64_t seed, MultilevelStats* stats = nullptr);

/// Seeded shuffle dealt round-robin; cluster sizes differ by at most one.
Partition partition_random(const Graph& g, std::size_t c, std::uint64_t seed);

/// Standard modularity-greedy Louvain, then merged (smallest community into
/// its best-connected neighbor) or split (largest cluster round-robin) until
/// exactly c clusters.
Partition partition_louvain(const Graph& g, std::size_t c, std::uint64_t seed);

PartitionQuality quality(const Graph& g, const Partition& p);

/// Throws std::invalid_argument when p is not a valid partition of g.
void validate_partition(const Graph& g, const Partition& p);

}  // namespace fairgp
