#include "fairgp/theory.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "fairgp/metrics.hpp"
#include "fairgp/rng.hpp"

namespace fairgp {

namespace {

void require_row_stochastic(const DenseMatrix& a) {
    const std::size_t n = a.rows();
    if (a.cols() != n) throw std::invalid_argument("bound check: matrix must be square");
    for (std::size_t u = 0; u < n; ++u) {
        double sum = 0.0;
        for (std::size_t v = 0; v < n; ++v) {
            if (a(u, v) < -1e-12)
                throw std::invalid_argument("bound check: negative attention entry");
            sum += a(u, v);
        }
        if (std::fabs(sum - 1.0) > 1e-6)
            throw std::invalid_argument("bound check: matrix is not row-stochastic (row " +
                                        std::to_string(u) + " sums to " + std::to_string(sum) +
                                        ")");
    }
}

void require_binary(const std::vector<int>& s) {
    for (int v : s)
        if (v != 0 && v != 1)
            throw std::invalid_argument("bound check: sensitive vector must be binary");
}

double cross_group_attention_mass(const DenseMatrix& a, const std::vector<int>& s) {
    const std::size_t n = s.size();
    // route 1: double loop
    double direct = 0.0;
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = 0; v < n; ++v)
            if (s[u] != s[v]) direct += a(u, v);
    // route 2: bilinear group-mask form 1_{s=0}^T A 1_{s=1} + 1_{s=1}^T A 1_{s=0}
    double bilinear = 0.0;
    for (std::size_t u = 0; u < n; ++u) {
        double row_mass_other = 0.0;
        for (std::size_t v = 0; v < n; ++v)
            if (s[v] != s[u]) row_mass_other += a(u, v);
        bilinear += row_mass_other;
    }
    if (std::fabs(direct - bilinear) > 1e-12 * std::max(1.0, std::fabs(direct)))
        throw std::runtime_error("check_theorem1: rhs routes disagree");
    return direct;
}

}  // namespace

BoundReport check_theorem1(const DenseMatrix& a_hat, const std::vector<int>& sensitive) {
    require_binary(sensitive);
    if (a_hat.rows() != sensitive.size())
        throw std::invalid_argument("check_theorem1: size mismatch");
    require_row_stochastic(a_hat);
    BoundReport r;
    r.bound = "theorem1";
    r.lhs = sensitive_similarity(a_hat, sensitive);
    r.rhs = cross_group_attention_mass(a_hat, sensitive);
    r.margin = r.rhs - r.lhs;
    r.satisfied = r.margin >= -kBoundTolerance;
    return r;
}

BoundReport check_lemma1(const DenseMatrix& a_hat, const std::vector<int>& sensitive) {
    require_binary(sensitive);
    if (a_hat.rows() != sensitive.size())
        throw std::invalid_argument("check_lemma1: size mismatch");
    require_row_stochastic(a_hat);
    BoundReport r;
    r.bound = "lemma1";
    r.lhs = sensitive_similarity(a_hat, sensitive);
    r.rhs = std::sqrt(static_cast<double>(sensitive.size()));
    r.margin = r.rhs - r.lhs;
    r.satisfied = r.margin >= -kBoundTolerance;
    return r;
}

BoundReport check_lemma1_unnormalized(const DenseMatrix& a_approx,
                                      const std::vector<int>& sensitive) {
    require_binary(sensitive);
    const std::size_t n = sensitive.size();
    if (a_approx.rows() != n || a_approx.cols() != n)
        throw std::invalid_argument("check_lemma1_unnormalized: size mismatch");
    BoundReport r;
    r.bound = "lemma1";
    r.lhs = sensitive_similarity(a_approx, sensitive);
    r.rhs = std::sqrt(static_cast<double>(n));
    r.margin = r.rhs - r.lhs;
    r.satisfied = r.margin >= -kBoundTolerance;
    double dev = 0.0;
    for (std::size_t u = 0; u < n; ++u) {
        double sum = 0.0;
        for (std::size_t v = 0; v < n; ++v) sum += a_approx(u, v);
        dev = std::max(dev, std::fabs(sum - 1.0));
    }
    r.row_sum_deviation = dev;
    return r;
}

BoundReport check_theorem2(const Graph& g, const DenseMatrix& x, const AttentionParams& params,
                           const Partition& partition, double scale) {
    const std::size_t n = x.rows();
    require_binary(g.sensitive());
    if (g.sensitive().size() != n) throw std::invalid_argument("check_theorem2: size mismatch");
    if (n % partition.c != 0)
        throw std::invalid_argument("check_theorem2: partition must be exactly balanced");
    for (std::size_t sz : partition.sizes)
        if (sz != n / partition.c)
            throw std::invalid_argument("check_theorem2: partition must be exactly balanced");

    const AttentionScores full = attention_scores(x, params, scale);
    const DenseMatrix approx = approx_partitioned_scores(full, partition, x, params, scale);
    const std::vector<int>& s = g.sensitive();

    const double d_full = sensitive_similarity(full.matrix, s);
    const double d_approx = sensitive_similarity(approx, s);

    BoundReport r;
    r.bound = "theorem2";
    r.lhs = std::fabs(d_full - d_approx);

    // rhs per the proof's final displayed line: for each node the inner sum
    // runs over every vertex outside its cluster, squared, summed over all
    // nodes; per-ordered-pair terms recorded alongside.
    const std::size_t c = partition.c;
    double total_full = 0.0, total_approx = 0.0;
    for (std::size_t u = 0; u < n; ++u) {
        const int pu = partition.assignment[u];
        double bu = 0.0, bu_approx = 0.0;
        for (std::size_t v = 0; v < n; ++v) {
            if (partition.assignment[v] == pu) continue;
            const double ds = static_cast<double>(s[u] - s[v]);
            bu += full.matrix(u, v) * ds;
            bu_approx += approx(u, v) * ds;
        }
        total_full += bu * bu;
        total_approx += bu_approx * bu_approx;
    }
    const double inv = 1.0 / (2.0 * std::sqrt(static_cast<double>(n)));
    r.rhs = inv * std::fabs(total_full - total_approx);

    for (std::size_t p = 0; p < c; ++p) {
        for (std::size_t q = 0; q < c; ++q) {
            if (p == q) continue;
            double tf = 0.0, ta = 0.0;
            for (std::size_t u = 0; u < n; ++u) {
                if (partition.assignment[u] != static_cast<int>(p)) continue;
                double bf = 0.0, ba = 0.0;
                for (std::size_t v = 0; v < n; ++v) {
                    if (partition.assignment[v] != static_cast<int>(q)) continue;
                    const double ds = static_cast<double>(s[u] - s[v]);
                    bf += full.matrix(u, v) * ds;
                    ba += approx(u, v) * ds;
                }
                tf += bf * bf;
                ta += ba * ba;
            }
            r.pair_terms.push_back(inv * std::fabs(tf - ta));
        }
    }

    // the provable first proof step, for attribution when the final-line rhs
    // is violated
    r.rhs_exact = inv * std::fabs(d_full * d_full - d_approx * d_approx);

    r.margin = r.lhs - r.rhs;
    r.satisfied = r.margin >= -kBoundTolerance;
    return r;
}

SweepResult sweep_bounds(const SweepConfig& cfg) {
    SweepResult result;
    Rng rng(cfg.seed);
    for (std::size_t i = 0; i < cfg.instances; ++i) {
        const std::size_t c = cfg.cluster_counts[rng.index(cfg.cluster_counts.size())];
        std::size_t n = cfg.n_min + rng.index(cfg.n_max - cfg.n_min + 1);
        n = std::max((n / c) * c, 2 * c);  // exact balance
        const std::size_t d = 2 + rng.index(4);

        // random instance: features, projection weights, binary s, ER edges
        DenseMatrix feats(n, d);
        for (double& v : feats.data()) v = rng.normal();
        std::vector<int> s(n);
        std::size_t ones = 0;
        for (auto& v : s) ones += (v = rng.bernoulli(0.5) ? 1 : 0);
        if (ones == 0) s[0] = 1;
        if (ones == n) s[0] = 0;
        std::vector<std::pair<NodeId, NodeId>> edges;
        for (NodeId u = 0; u < n; ++u)
            for (NodeId v = u + 1; v < n; ++v)
                if (rng.bernoulli(cfg.edge_prob)) edges.push_back({u, v});
        Graph g = build_graph(edges, feats, s, std::vector<int>(n, 0));

        AttentionParams params;
        const double bound = 1.0 / std::sqrt(static_cast<double>(d));
        params.w_q = DenseMatrix(d, d);
        params.w_k = DenseMatrix(d, d);
        params.w_v = DenseMatrix(d, d);
        for (double& v : params.w_q.data()) v = rng.normal() * bound;
        for (double& v : params.w_k.data()) v = rng.normal() * bound;
        for (double& v : params.w_v.data()) v = rng.normal() * bound;
        const double scale = std::sqrt(static_cast<double>(d));

        const Partition part = partition_random(g, c, rng.next_u64());
        const std::string desc = "sweep#" + std::to_string(i) + " n=" + std::to_string(n) +
                                 " c=" + std::to_string(c) + " d=" + std::to_string(d);

        const AttentionScores full = attention_scores(feats, params, scale);
        BoundReport t1 = check_theorem1(full.matrix, s);
        t1.instance = desc;
        BoundReport l1 = check_lemma1(full.matrix, s);
        l1.instance = desc;
        BoundReport t2 = check_theorem2(g, feats, params, part, scale);
        t2.instance = desc;

        for (BoundReport* r : {&t1, &l1, &t2}) {
            if (!r->satisfied) {
                ++result.violations;
                if (!result.first_violation)
                    result.first_violation = r->bound + " violated on " + desc + " (margin " +
                                             std::to_string(r->margin) + ")";
            }
            result.reports.push_back(*r);
        }
    }
    return result;
}

}  // namespace fairgp
