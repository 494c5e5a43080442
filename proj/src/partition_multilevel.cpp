#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <tuple>

#include "fairgp/partition.hpp"
#include "fairgp/rng.hpp"
#include "partition_common.hpp"

namespace fairgp {

namespace {

// Weighted working graph used across coarsening levels. Edge weights are the
// number of contracted unit edges, node weights the number of contracted
// vertices.
struct WGraph {
    std::vector<std::vector<std::pair<int, long long>>> adj;  // (neighbor, weight), sorted by id
    std::vector<long long> node_w;

    std::size_t size() const { return node_w.size(); }
};

WGraph from_graph(const Graph& g) {
    WGraph w;
    const std::size_t n = g.node_count();
    w.adj.resize(n);
    w.node_w.assign(n, 1);
    for (NodeId u = 0; u < n; ++u)
        for (NodeId v : g.neighbors(u)) w.adj[u].push_back({static_cast<int>(v), 1});
    return w;
}

// Heavy-edge matching; visit order comes from the seeded shuffle, partner
// choice by max edge weight with ties to the lowest id.
std::pair<WGraph, std::vector<int>> coarsen(const WGraph& g, Rng& rng, long long max_node_w) {
    const std::size_t n = g.size();
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);

    std::vector<int> mate(n, -1);
    for (int u : order) {
        if (mate[u] != -1) continue;
        int best = -1;
        long long best_w = 0;
        for (const auto& [v, w] : g.adj[u]) {
            if (mate[v] != -1 || v == u) continue;
            if (g.node_w[u] + g.node_w[v] > max_node_w) continue;
            if (w > best_w || (w == best_w && (best == -1 || v < best))) {
                best = v;
                best_w = w;
            }
        }
        if (best != -1) {
            mate[u] = best;
            mate[best] = u;
        } else {
            mate[u] = u;
        }
    }

    std::vector<int> to_coarse(n, -1);
    int next_id = 0;
    for (std::size_t u = 0; u < n; ++u) {
        if (to_coarse[u] != -1) continue;
        to_coarse[u] = next_id;
        to_coarse[mate[u]] = next_id;
        ++next_id;
    }

    WGraph cg;
    cg.adj.resize(next_id);
    cg.node_w.assign(next_id, 0);
    for (std::size_t u = 0; u < n; ++u) cg.node_w[to_coarse[u]] += g.node_w[u];

    std::vector<std::tuple<int, int, long long>> edges;
    for (std::size_t u = 0; u < n; ++u)
        for (const auto& [v, w] : g.adj[u]) {
            const int cu = to_coarse[u], cv = to_coarse[v];
            if (cu < cv) edges.push_back({cu, cv, w});
        }
    std::sort(edges.begin(), edges.end());
    for (std::size_t i = 0; i < edges.size();) {
        std::size_t j = i;
        long long sum = 0;
        while (j < edges.size() && std::get<0>(edges[j]) == std::get<0>(edges[i]) &&
               std::get<1>(edges[j]) == std::get<1>(edges[i])) {
            sum += std::get<2>(edges[j]);
            ++j;
        }
        const int a = std::get<0>(edges[i]), b = std::get<1>(edges[i]);
        cg.adj[a].push_back({b, sum});
        cg.adj[b].push_back({a, sum});
        i = j;
    }
    for (auto& list : cg.adj) std::sort(list.begin(), list.end());
    return {std::move(cg), std::move(to_coarse)};
}

std::size_t cut_of(const WGraph& g, const std::vector<int>& assign) {
    long long cut = 0;
    for (std::size_t u = 0; u < g.size(); ++u)
        for (const auto& [v, w] : g.adj[u])
            if (assign[u] != assign[v] && u < static_cast<std::size_t>(v)) cut += w;
    return static_cast<std::size_t>(cut);
}

// Greedy graph growing: regions grown by max connection gain, seeds and ties
// by lowest id.
std::vector<int> initial_partition(const WGraph& g, std::size_t c, long long cap) {
    const std::size_t n = g.size();
    const long long total =
        std::accumulate(g.node_w.begin(), g.node_w.end(), static_cast<long long>(0));
    std::vector<int> assign(n, -1);
    std::size_t assigned = 0;
    long long remaining_w = total;

    for (std::size_t p = 0; p < c; ++p) {
        if (assigned == n) break;
        const long long target =
            std::max<long long>(1, remaining_w / static_cast<long long>(c - p));
        if (p + 1 == c) {
            for (std::size_t u = 0; u < n; ++u)
                if (assign[u] == -1) assign[u] = static_cast<int>(p);
            break;
        }
        std::vector<long long> gain(n, 0);
        std::vector<bool> in_frontier(n, false);
        long long region_w = 0;
        while (region_w < target) {
            int pick = -1;
            long long best_gain = -1;
            for (std::size_t u = 0; u < n; ++u) {
                if (assign[u] != -1 || !in_frontier[u]) continue;
                if (gain[u] > best_gain) {
                    best_gain = gain[u];
                    pick = static_cast<int>(u);
                }
            }
            if (pick == -1) {
                for (std::size_t u = 0; u < n; ++u)
                    if (assign[u] == -1) {
                        pick = static_cast<int>(u);
                        break;
                    }
            }
            if (pick == -1) break;
            if (region_w > 0 && region_w + g.node_w[pick] > cap) break;
            assign[pick] = static_cast<int>(p);
            region_w += g.node_w[pick];
            remaining_w -= g.node_w[pick];
            ++assigned;
            for (const auto& [v, w] : g.adj[pick])
                if (assign[v] == -1) {
                    gain[v] += w;
                    in_frontier[v] = true;
                }
        }
    }
    for (std::size_t u = 0; u < n; ++u)
        if (assign[u] == -1) assign[u] = static_cast<int>(c - 1);
    return assign;
}

long long conn_to(const WGraph& g, const std::vector<int>& assign, int u, int cluster) {
    long long s = 0;
    for (const auto& [v, w] : g.adj[u])
        if (assign[v] == cluster) s += w;
    return s;
}

// Moves nodes out of overweight clusters and fills empty ones. With unit node
// weights (finest level) this always reaches the cap exactly.
void repair_balance(const WGraph& g, std::vector<int>& assign, std::size_t c, long long cap) {
    const std::size_t n = g.size();
    std::vector<long long> cw(c, 0);
    for (std::size_t u = 0; u < n; ++u) cw[assign[u]] += g.node_w[u];

    // fill empty clusters from the heaviest one
    for (std::size_t q = 0; q < c; ++q) {
        while (cw[q] == 0) {
            std::size_t donor = 0;
            for (std::size_t p = 1; p < c; ++p)
                if (cw[p] > cw[donor]) donor = p;
            int pick = -1;
            long long best_loss = std::numeric_limits<long long>::max();
            for (std::size_t u = 0; u < n; ++u) {
                if (assign[u] != static_cast<int>(donor)) continue;
                if (cw[donor] - g.node_w[u] < 1) continue;
                const long long loss = conn_to(g, assign, static_cast<int>(u), donor);
                if (loss < best_loss) {
                    best_loss = loss;
                    pick = static_cast<int>(u);
                }
            }
            if (pick == -1) break;
            cw[donor] -= g.node_w[pick];
            cw[q] += g.node_w[pick];
            assign[pick] = static_cast<int>(q);
        }
    }

    // trim overweight clusters
    for (int round = 0; round < static_cast<int>(2 * n + 4); ++round) {
        int over = -1;
        for (std::size_t p = 0; p < c; ++p)
            if (cw[p] > cap && (over == -1 || cw[p] > cw[over])) over = static_cast<int>(p);
        if (over == -1) break;
        int pick = -1, dest = -1;
        long long best_score = std::numeric_limits<long long>::min();
        for (std::size_t u = 0; u < n; ++u) {
            if (assign[u] != over) continue;
            if (cw[over] - g.node_w[u] < 1) continue;
            for (std::size_t q = 0; q < c; ++q) {
                if (q == static_cast<std::size_t>(over)) continue;
                if (cw[q] + g.node_w[u] > cap) continue;
                const long long score = conn_to(g, assign, static_cast<int>(u), static_cast<int>(q)) -
                                        conn_to(g, assign, static_cast<int>(u), over);
                if (score > best_score) {
                    best_score = score;
                    pick = static_cast<int>(u);
                    dest = static_cast<int>(q);
                }
            }
        }
        if (pick == -1) break;  // nothing fits; best-effort
        cw[over] -= g.node_w[pick];
        cw[dest] += g.node_w[pick];
        assign[pick] = dest;
    }
}

// One FM pass: locked hill-climbing moves ordered by gain (ties lowest node,
// then lowest target cluster), rolled back to the best prefix. Returns the
// cut after the pass; never worse than the entry cut.
std::size_t fm_pass(const WGraph& g, std::vector<int>& assign, std::size_t c, long long cap,
                    std::size_t start_cut) {
    const std::size_t n = g.size();
    std::vector<long long> cw(c, 0);
    for (std::size_t u = 0; u < n; ++u) cw[assign[u]] += g.node_w[u];

    std::vector<std::vector<long long>> conn(n, std::vector<long long>(c, 0));
    for (std::size_t u = 0; u < n; ++u)
        for (const auto& [v, w] : g.adj[u]) conn[u][assign[v]] += w;

    // (gain, node, target); lazy heap entries revalidated on pop
    using Entry = std::tuple<long long, int, int>;
    auto cmp = [](const Entry& a, const Entry& b) {
        if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) < std::get<0>(b);
        if (std::get<1>(a) != std::get<1>(b)) return std::get<1>(a) > std::get<1>(b);
        return std::get<2>(a) > std::get<2>(b);
    };
    std::priority_queue<Entry, std::vector<Entry>, decltype(cmp)> heap(cmp);

    // single best candidate per node; stale entries are refreshed on pop
    auto best_move = [&](int u) -> Entry {
        const int from = assign[u];
        long long best_gain = std::numeric_limits<long long>::min();
        int best_q = -1;
        for (std::size_t q = 0; q < c; ++q) {
            if (static_cast<int>(q) == from) continue;
            const long long gain = conn[u][q] - conn[u][from];
            if (gain > best_gain) {
                best_gain = gain;
                best_q = static_cast<int>(q);
            }
        }
        return {best_gain, u, best_q};
    };
    auto push_best = [&](int u) {
        const Entry e = best_move(u);
        if (std::get<2>(e) >= 0) heap.push(e);
    };

    std::vector<bool> locked(n, false);
    for (std::size_t u = 0; u < n; ++u) push_best(static_cast<int>(u));

    struct Move {
        int node, from, to;
    };
    std::vector<Move> moves;
    std::vector<std::size_t> cut_after;
    long long cur_cut = static_cast<long long>(start_cut);

    while (!heap.empty() && moves.size() < n) {
        auto [gain, u, q] = heap.top();
        heap.pop();
        if (locked[u] || assign[u] == q) continue;
        const Entry cur = best_move(u);
        if (gain != std::get<0>(cur) || q != std::get<2>(cur)) {  // stale: refresh
            heap.push(cur);
            continue;
        }
        if (cw[q] + g.node_w[u] > cap) continue;
        if (cw[assign[u]] - g.node_w[u] < 1) continue;

        const int from = assign[u];
        cw[from] -= g.node_w[u];
        cw[q] += g.node_w[u];
        assign[u] = q;
        locked[u] = true;
        cur_cut -= gain;
        for (const auto& [v, w] : g.adj[u]) {
            conn[v][from] -= w;
            conn[v][q] += w;
            if (!locked[v]) push_best(v);
        }
        moves.push_back({u, from, q});
        cut_after.push_back(static_cast<std::size_t>(cur_cut));
    }

    // revert to the best prefix (earliest minimum)
    std::size_t best = start_cut, best_idx = 0;
    for (std::size_t i = 0; i < cut_after.size(); ++i)
        if (cut_after[i] < best) {
            best = cut_after[i];
            best_idx = i + 1;
        }
    for (std::size_t i = moves.size(); i > best_idx; --i) assign[moves[i - 1].node] = moves[i - 1].from;
    return best;
}

}  // namespace

Partition partition_multilevel(const Graph& g, std::size_t c, double balance_eps,
                               std::uint64_t seed, MultilevelStats* stats) {
    const std::size_t n = g.node_count();
    if (c < 1 || c > n) throw std::invalid_argument("partition_multilevel: need 1 <= c <= n");
    if (balance_eps < 0) throw std::invalid_argument("partition_multilevel: negative balance_eps");

    Partition p;
    p.c = c;
    p.assignment.assign(n, 0);
    if (c == 1) {
        p.sizes = {n};
        return p;
    }
    if (c == n) {
        for (std::size_t u = 0; u < n; ++u) p.assignment[u] = static_cast<int>(u);
        p.sizes.assign(n, 1);
        return p;
    }

    const long long total = static_cast<long long>(n);
    const long long ideal_cap =
        static_cast<long long>(std::floor((1.0 + balance_eps) * static_cast<double>(total) /
                                          static_cast<double>(c)));
    const long long cap = std::max<long long>((total + c - 1) / c, ideal_cap);

    Rng rng(seed);
    std::vector<WGraph> levels;
    std::vector<std::vector<int>> maps;
    levels.push_back(from_graph(g));
    const std::size_t coarse_target = std::max<std::size_t>(8 * c, 64);
    const long long match_cap = std::max<long long>(1, (2 * total) / static_cast<long long>(coarse_target));
    while (levels.back().size() > coarse_target) {
        auto [cg, map] = coarsen(levels.back(), rng, std::min(cap, match_cap));
        if (cg.size() >= levels.back().size() * 95 / 100) break;
        maps.push_back(std::move(map));
        levels.push_back(std::move(cg));
    }

    std::vector<int> assign = initial_partition(levels.back(), c, cap);
    repair_balance(levels.back(), assign, c, cap);

    if (stats) stats->pass_cuts_per_level.clear();
    for (std::size_t lvl = levels.size(); lvl-- > 0;) {
        const WGraph& wg = levels[lvl];
        std::size_t cut = cut_of(wg, assign);
        std::vector<std::size_t> pass_cuts;
        for (int pass = 0; pass < 8; ++pass) {
            const std::size_t after = fm_pass(wg, assign, c, cap, cut);
            pass_cuts.push_back(after);
            if (after == cut) break;
            cut = after;
        }
        if (stats) stats->pass_cuts_per_level.push_back(std::move(pass_cuts));
        if (lvl > 0) {
            const std::vector<int>& map = maps[lvl - 1];
            std::vector<int> fine(levels[lvl - 1].size());
            for (std::size_t u = 0; u < fine.size(); ++u) fine[u] = assign[map[u]];
            assign = std::move(fine);
            repair_balance(levels[lvl - 1], assign, c, cap);
        }
    }

    p.assignment = std::move(assign);
    detail::relabel_canonical(p);
    double balance = 0.0;
    for (std::size_t s : p.sizes)
        balance = std::max(balance, static_cast<double>(s) * static_cast<double>(c) /
                                        static_cast<double>(n));
    p.balance_achieved = balance <= 1.0 + balance_eps + 1e-12;
    return p;
}

}  // namespace fairgp
