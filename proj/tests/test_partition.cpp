#include <doctest.h>

#include <stdexcept>

#include <algorithm>

#include "fairgp/partition.hpp"
#include "fairgp/rng.hpp"
#include "fairgp/verify.hpp"

using namespace fairgp;

namespace {

Graph make(const std::vector<std::pair<NodeId, NodeId>>& edges, std::size_t n) {
    return build_graph(edges, DenseMatrix(n, 1), std::vector<int>(n, 0), std::vector<int>(n, 0));
}

Graph two_triangles_bridge() {
    return make({{0, 1}, {0, 2}, {1, 2}, {2, 3}, {3, 4}, {3, 5}, {4, 5}}, 6);
}

Graph random_er(Rng& rng, std::size_t n, double p) {
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (NodeId u = 0; u < n; ++u)
        for (NodeId v = u + 1; v < n; ++v)
            if (rng.bernoulli(p)) edges.push_back({u, v});
    return make(edges, n);
}

}  // namespace

TEST_CASE("multilevel finds the bridge cut") {
    const Graph g = two_triangles_bridge();
    const Partition p = partition_multilevel(g, 2, 0.0, 1);
    validate_partition(g, p);
    CHECK(quality(g, p).edge_cut == 1);
    CHECK(verify::brute_force_min_cut_2way(g) == 1);
    CHECK(quality(g, p).balance == doctest::Approx(1.0));
}

TEST_CASE("multilevel trivial cluster counts") {
    const Graph g = two_triangles_bridge();
    const Partition one = partition_multilevel(g, 1, 0.0, 0);
    CHECK(one.c == 1);
    CHECK(quality(g, one).edge_cut == 0);
    CHECK(quality(g, one).balance == doctest::Approx(1.0));
    const Partition all = partition_multilevel(g, 6, 0.0, 0);
    CHECK(all.sizes == std::vector<std::size_t>(6, 1));
    CHECK(quality(g, all).edge_cut == g.edge_count());
}

TEST_CASE("multilevel refinement cut is monotone per pass") {
    Rng rng(5);
    for (int trial = 0; trial < 5; ++trial) {
        const Graph g = random_er(rng, 80 + rng.index(60), 0.08);
        MultilevelStats stats;
        partition_multilevel(g, 4, 0.05, trial, &stats);
        for (const auto& level : stats.pass_cuts_per_level)
            for (std::size_t i = 1; i < level.size(); ++i) CHECK(level[i] <= level[i - 1]);
    }
}

TEST_CASE("multilevel deterministic per seed") {
    Rng rng(6);
    const Graph g = random_er(rng, 90, 0.07);
    const Partition a = partition_multilevel(g, 5, 0.05, 42);
    const Partition b = partition_multilevel(g, 5, 0.05, 42);
    CHECK(a.assignment == b.assignment);
}

TEST_CASE("random partition sizes and determinism") {
    const Graph g = make({}, 5);
    const Partition p = partition_random(g, 2, 7);
    std::vector<std::size_t> sz = p.sizes;
    std::sort(sz.begin(), sz.end());
    CHECK(sz == std::vector<std::size_t>{2, 3});

    const Graph g4 = make({}, 4);
    const Partition singles = partition_random(g4, 4, 0);
    CHECK(singles.sizes == std::vector<std::size_t>(4, 1));

    const Partition again = partition_random(g, 2, 7);
    CHECK(again.assignment == p.assignment);
}

TEST_CASE("louvain recovers disjoint cliques") {
    // two disjoint K4s
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (NodeId u = 0; u < 4; ++u)
        for (NodeId v = u + 1; v < 4; ++v) {
            edges.push_back({u, v});
            edges.push_back({static_cast<NodeId>(u + 4), static_cast<NodeId>(v + 4)});
        }
    const Graph g = make(edges, 8);
    const Partition p = partition_louvain(g, 2, 0);
    validate_partition(g, p);
    CHECK(quality(g, p).edge_cut == 0);
    for (NodeId u = 1; u < 4; ++u) CHECK(p.assignment[u] == p.assignment[0]);
    for (NodeId u = 5; u < 8; ++u) CHECK(p.assignment[u] == p.assignment[4]);
}

TEST_CASE("louvain forced counts") {
    const Graph edgeless = make({}, 5);
    const Partition singles = partition_louvain(edgeless, 5, 1);
    CHECK(singles.sizes == std::vector<std::size_t>(5, 1));
    const Graph g = two_triangles_bridge();
    const Partition one = partition_louvain(g, 1, 1);
    CHECK(one.c == 1);
    CHECK(one.sizes[0] == 6);
}

TEST_CASE("quality on fixtures") {
    // singletons on K3
    const Graph k3 = make({{0, 1}, {0, 2}, {1, 2}}, 3);
    Partition singles;
    singles.c = 3;
    singles.assignment = {0, 1, 2};
    singles.sizes = {1, 1, 1};
    CHECK(quality(k3, singles).edge_cut == 3);

    const Graph g = two_triangles_bridge();
    Partition split;
    split.c = 2;
    split.assignment = {0, 0, 0, 1, 1, 1};
    split.sizes = {3, 3};
    CHECK(quality(g, split).edge_cut == 1);
    CHECK(quality(g, split).balance == doctest::Approx(1.0));
}

TEST_CASE("validity across strategies and random cases") {
    Rng rng(44);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t n = 2 + rng.index(60);
        const Graph g = random_er(rng, n, 0.05 + 0.2 * rng.uniform());
        const std::size_t c = 1 + rng.index(std::min<std::size_t>(n, 8));
        const std::uint64_t seed = rng.next_u64();
        switch (trial % 3) {
            case 0: {
                const Partition p = partition_multilevel(g, c, 0.05, seed);
                validate_partition(g, p);
                const std::size_t cap = std::max<std::size_t>(
                    (n + c - 1) / c,
                    static_cast<std::size_t>((1.0 + 0.05) * double(n) / double(c)));
                for (std::size_t s : p.sizes) CHECK(s <= cap);
                break;
            }
            case 1:
                validate_partition(g, partition_louvain(g, c, seed));
                break;
            default: {
                const Partition p = partition_random(g, c, seed);
                validate_partition(g, p);
                const auto [mn, mx] = std::minmax_element(p.sizes.begin(), p.sizes.end());
                CHECK(*mx - *mn <= 1);
            }
        }
    }
}

TEST_CASE("errors: cluster count out of range") {
    const Graph g = make({{0, 1}}, 2);
    CHECK_THROWS_AS(partition_multilevel(g, 3, 0.0, 0), std::invalid_argument);
    CHECK_THROWS_AS(partition_random(g, 3, 0), std::invalid_argument);
    CHECK_THROWS_AS(partition_louvain(g, 0, 0), std::invalid_argument);
}

TEST_CASE("multilevel beats random on ER graphs") {
    Rng rng(77);
    std::vector<std::size_t> ml, rd;
    for (int seed = 0; seed < 6; ++seed) {
        const Graph g = random_er(rng, 150, 0.05);
        ml.push_back(quality(g, partition_multilevel(g, 6, 0.05, seed)).edge_cut);
        rd.push_back(quality(g, partition_random(g, 6, seed)).edge_cut);
    }
    std::sort(ml.begin(), ml.end());
    std::sort(rd.begin(), rd.end());
    CHECK(ml[ml.size() / 2] <= rd[rd.size() / 2]);
}
