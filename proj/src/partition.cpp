#include "fairgp/partition.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "fairgp/rng.hpp"
#include "partition_common.hpp"

namespace fairgp {

Partition partition_random(const Graph& g, std::size_t c, std::uint64_t seed) {
    const std::size_t n = g.node_count();
    if (c < 1 || c > n) throw std::invalid_argument("partition_random: need 1 <= c <= n");
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    rng.shuffle(order);
    Partition p;
    p.c = c;
    p.assignment.assign(n, 0);
    for (std::size_t j = 0; j < n; ++j) p.assignment[order[j]] = static_cast<int>(j % c);
    detail::relabel_canonical(p);
    return p;
}

namespace {

// Aggregated weighted graph for Louvain levels.
struct LGraph {
    std::vector<std::vector<std::pair<int, double>>> adj;  // no self entries
    std::vector<double> self_w;                            // self-loop weight
    std::size_t size() const { return self_w.size(); }
};

double node_degree_w(const LGraph& g, int u) {
    double k = 2.0 * g.self_w[u];
    for (const auto& [v, w] : g.adj[u]) k += w;
    return k;
}

// One Louvain level: greedy modularity moves until a full sweep makes none.
// Returns community ids (dense) per node.
std::vector<int> local_moving(const LGraph& g, Rng& rng) {
    const std::size_t n = g.size();
    std::vector<int> comm(n);
    std::iota(comm.begin(), comm.end(), 0);
    std::vector<double> k(n);
    double m2 = 0.0;
    for (std::size_t u = 0; u < n; ++u) {
        k[u] = node_degree_w(g, static_cast<int>(u));
        m2 += k[u];
    }
    if (m2 <= 0.0) return comm;
    std::vector<double> tot(n);
    for (std::size_t u = 0; u < n; ++u) tot[u] = k[u];

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);

    bool moved = true;
    for (int sweep = 0; sweep < 200 && moved; ++sweep) {
        moved = false;
        for (int u : order) {
            const int cu = comm[u];
            tot[cu] -= k[u];
            std::vector<std::pair<int, double>> neigh_w;  // (community, edge weight into it)
            for (const auto& [v, w] : g.adj[u]) {
                bool found = false;
                for (auto& nc : neigh_w)
                    if (nc.first == comm[v]) {
                        nc.second += w;
                        found = true;
                        break;
                    }
                if (!found) neigh_w.push_back({comm[v], w});
            }
            int best = cu;
            double best_gain = 0.0;
            double w_cu = 0.0;
            for (const auto& [cc, w] : neigh_w)
                if (cc == cu) w_cu = w;
            const double stay_gain = w_cu - k[u] * tot[cu] / m2;
            for (const auto& [cc, w] : neigh_w) {
                const double gain = w - k[u] * tot[cc] / m2;
                if (gain > stay_gain + 1e-12 &&
                    (best == cu || gain > best_gain + 1e-12 ||
                     (std::abs(gain - best_gain) <= 1e-12 && cc < best))) {
                    best = cc;
                    best_gain = gain;
                }
            }
            tot[best] += k[u];
            if (best != cu) {
                comm[u] = best;
                moved = true;
            }
        }
    }
    // densify ids
    std::vector<int> remap(n, -1);
    int next = 0;
    for (std::size_t u = 0; u < n; ++u)
        if (remap[comm[u]] == -1) remap[comm[u]] = next++;
    for (std::size_t u = 0; u < n; ++u) comm[u] = remap[comm[u]];
    return comm;
}

LGraph aggregate(const LGraph& g, const std::vector<int>& comm, int n_comm) {
    LGraph out;
    out.adj.resize(n_comm);
    out.self_w.assign(n_comm, 0.0);
    std::vector<std::vector<std::pair<int, double>>> buckets(n_comm);
    for (std::size_t u = 0; u < g.size(); ++u) {
        out.self_w[comm[u]] += g.self_w[u];
        for (const auto& [v, w] : g.adj[u]) {
            if (static_cast<std::size_t>(v) < u) continue;  // each edge once
            if (comm[u] == comm[v])
                out.self_w[comm[u]] += w;
            else
                buckets[comm[u]].push_back({comm[v], w});
        }
    }
    for (int cu = 0; cu < n_comm; ++cu) {
        auto& b = buckets[cu];
        std::sort(b.begin(), b.end());
        for (std::size_t i = 0; i < b.size();) {
            std::size_t j = i;
            double sum = 0.0;
            while (j < b.size() && b[j].first == b[i].first) sum += b[j++].second;
            out.adj[cu].push_back({b[i].first, sum});
            out.adj[b[i].first].push_back({cu, sum});
            i = j;
        }
    }
    for (auto& list : out.adj) std::sort(list.begin(), list.end());
    return out;
}

// Edge weight between cluster pairs of a node-level assignment.
std::vector<double> inter_cluster_weight(const Graph& g, const std::vector<int>& assign,
                                         std::size_t c, std::size_t cluster) {
    std::vector<double> w(c, 0.0);
    for (NodeId u = 0; u < g.node_count(); ++u) {
        if (assign[u] != static_cast<int>(cluster)) continue;
        for (NodeId v : g.neighbors(u))
            if (assign[v] != static_cast<int>(cluster)) w[assign[v]] += 1.0;
    }
    return w;
}

}  // namespace

Partition partition_louvain(const Graph& g, std::size_t c, std::uint64_t seed) {
    const std::size_t n = g.node_count();
    if (c < 1 || c > n) throw std::invalid_argument("partition_louvain: need 1 <= c <= n");

    Rng rng(seed);
    LGraph lg;
    lg.adj.resize(n);
    lg.self_w.assign(n, 0.0);
    for (NodeId u = 0; u < n; ++u)
        for (NodeId v : g.neighbors(u)) lg.adj[u].push_back({static_cast<int>(v), 1.0});

    std::vector<int> assign(n);
    std::iota(assign.begin(), assign.end(), 0);
    int n_comm = static_cast<int>(n);
    for (int level = 0; level < 64; ++level) {
        std::vector<int> comm = local_moving(lg, rng);
        int next = 0;
        for (int cc : comm) next = std::max(next, cc + 1);
        if (next == static_cast<int>(lg.size())) break;  // no merge happened
        for (std::size_t u = 0; u < n; ++u) assign[u] = comm[assign[u]];
        lg = aggregate(lg, comm, next);
        n_comm = next;
    }

    // force the community count to exactly c
    // merge smallest community into its best-connected neighbor community
    while (n_comm > static_cast<int>(c)) {
        std::vector<std::size_t> sz(n_comm, 0);
        for (int a : assign) ++sz[a];
        int smallest = 0;
        for (int p = 1; p < n_comm; ++p)
            if (sz[p] < sz[smallest]) smallest = p;
        auto w = inter_cluster_weight(g, assign, n_comm, smallest);
        int target = -1;
        double best_w = -1.0;
        for (int q = 0; q < n_comm; ++q) {
            if (q == smallest) continue;
            if (w[q] > best_w) {
                best_w = w[q];
                target = q;
            }
        }
        if (best_w <= 0.0) {
            // disconnected community: merge into the next smallest
            target = -1;
            for (int q = 0; q < n_comm; ++q)
                if (q != smallest && (target == -1 || sz[q] < sz[target])) target = q;
        }
        for (int& a : assign)
            if (a == smallest) a = target;
        const int last = n_comm - 1;
        if (smallest != last)
            for (int& a : assign)  // fill the freed id so ids stay dense
                if (a == last) a = smallest;
        --n_comm;
    }
    // split the largest cluster round-robin until exactly c
    while (n_comm < static_cast<int>(c)) {
        std::vector<std::size_t> sz(n_comm, 0);
        for (int a : assign) ++sz[a];
        int largest = 0;
        for (int p = 1; p < n_comm; ++p)
            if (sz[p] > sz[largest]) largest = p;
        int flip = 0;
        for (std::size_t u = 0; u < n; ++u) {
            if (assign[u] != largest) continue;
            if (flip++ % 2 == 1) assign[u] = n_comm;
        }
        ++n_comm;
    }

    Partition p;
    p.c = c;
    p.assignment = std::move(assign);
    detail::relabel_canonical(p);
    return p;
}

PartitionQuality quality(const Graph& g, const Partition& p) {
    if (p.assignment.size() != g.node_count())
        throw std::invalid_argument("quality: assignment length mismatch");
    PartitionQuality q;
    std::size_t cut = 0;
    g.for_each_edge([&](NodeId u, NodeId v) {
        if (p.assignment[u] != p.assignment[v]) ++cut;
    });
    q.edge_cut = cut;
    std::size_t max_size = 0;
    for (std::size_t s : p.sizes) max_size = std::max(max_size, s);
    q.balance = static_cast<double>(max_size) * static_cast<double>(p.c) /
                static_cast<double>(g.node_count());
    return q;
}

void validate_partition(const Graph& g, const Partition& p) {
    if (p.assignment.size() != g.node_count())
        throw std::invalid_argument("partition: assignment length != node count");
    if (p.c == 0) throw std::invalid_argument("partition: zero clusters");
    if (p.sizes.size() != p.c) throw std::invalid_argument("partition: sizes length != c");
    std::vector<std::size_t> counted(p.c, 0);
    for (int a : p.assignment) {
        if (a < 0 || static_cast<std::size_t>(a) >= p.c)
            throw std::invalid_argument("partition: cluster id out of range");
        ++counted[a];
    }
    for (std::size_t pidx = 0; pidx < p.c; ++pidx) {
        if (counted[pidx] == 0) throw std::invalid_argument("partition: empty cluster");
        if (counted[pidx] != p.sizes[pidx])
            throw std::invalid_argument("partition: sizes inconsistent with assignment");
    }
}

}  // namespace fairgp
