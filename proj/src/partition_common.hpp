#pragma once

#include <vector>

#include "fairgp/partition.hpp"

namespace fairgp::detail {

// Relabels cluster ids by order of each cluster's smallest node, so equal
// partitions serialize identically, and recomputes sizes.
inline void relabel_canonical(Partition& p) {
    int next = 0;
    std::vector<int> remap(p.c, -1);
    for (int a : p.assignment)
        if (remap[a] == -1) remap[a] = next++;
    for (int& a : p.assignment) a = remap[a];
    std::vector<std::size_t> sizes(p.c, 0);
    for (int a : p.assignment) ++sizes[a];
    p.sizes = std::move(sizes);
}

}  // namespace fairgp::detail
