#include "fairgp/attention.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "fairgp/parallel.hpp"

namespace fairgp {

namespace {

void check_input(const DenseMatrix& x, const AttentionParams& p, double scale) {
    if (!(scale > 0)) throw std::invalid_argument("attention: scale must be positive");
    if (!x.all_finite()) throw std::invalid_argument("attention: non-finite input");
    if (x.cols() != p.w_q.rows() || x.cols() != p.w_k.rows() || x.cols() != p.w_v.rows())
        throw std::invalid_argument("attention: input width does not match projections");
    if (p.w_q.cols() != p.w_k.cols())
        throw std::invalid_argument("attention: W_Q and W_K must share column count");
    if (p.heads == 0 || p.w_q.cols() % p.heads != 0 || p.w_v.cols() % p.heads != 0)
        throw std::invalid_argument("attention: head count must divide d_k and d_v");
}

std::vector<std::vector<int>> cluster_members(const Partition& part) {
    std::vector<std::vector<int>> members(part.c);
    for (std::size_t u = 0; u < part.assignment.size(); ++u)
        members[part.assignment[u]].push_back(static_cast<int>(u));
    return members;
}

// full row softmax of q·kᵀ/scale
DenseMatrix scores_from_qk(const DenseMatrix& q, const DenseMatrix& k, double scale,
                           AttentionCost* cost) {
    const std::size_t n = q.rows();
    DenseMatrix logits = matmul_transb(q, k);
    DenseMatrix s(n, n);
    parallel_for_rows(n, [&](std::size_t r0, std::size_t r1) {
        for (std::size_t u = r0; u < r1; ++u) {
            const double* lu = logits.row(u);
            double* su = s.row(u);
            double mx = -HUGE_VAL;
            for (std::size_t v = 0; v < n; ++v) mx = std::max(mx, lu[v] / scale);
            double sum = 0.0;
            for (std::size_t v = 0; v < n; ++v) {
                su[v] = std::exp(lu[v] / scale - mx);
                sum += su[v];
            }
            for (std::size_t v = 0; v < n; ++v) su[v] /= sum;
        }
    });
    if (cost) cost->pairs += static_cast<std::uint64_t>(n) * n;
    return s;
}

// per-cluster row softmax; entries across clusters are exactly zero
DenseMatrix masked_scores_from_qk(const DenseMatrix& q, const DenseMatrix& k,
                                  const Partition& partition, double scale, AttentionCost* cost) {
    const std::size_t n = q.rows();
    const std::size_t dk = q.cols();
    DenseMatrix s(n, n);
    const auto members = cluster_members(partition);
    std::uint64_t pairs = 0;
    for (const auto& cluster : members) {
        const std::size_t m = cluster.size();
        pairs += static_cast<std::uint64_t>(m) * m;
        parallel_for_rows(m, [&](std::size_t r0, std::size_t r1) {
            std::vector<double> logits(m);
            for (std::size_t i = r0; i < r1; ++i) {
                const int u = cluster[i];
                const double* qu = q.row(u);
                for (std::size_t j = 0; j < m; ++j) {
                    const double* kv = k.row(cluster[j]);
                    double acc = 0.0;
                    for (std::size_t t = 0; t < dk; ++t) acc += qu[t] * kv[t];
                    logits[j] = acc / scale;
                }
                double mx = logits[0];
                for (double v : logits) mx = std::max(mx, v);
                double sum = 0.0;
                for (double v : logits) sum += std::exp(v - mx);
                double* su = s.row(u);
                for (std::size_t j = 0; j < m; ++j)
                    su[cluster[j]] = std::exp(logits[j] - mx) / sum;
            }
        });
    }
    if (cost) cost->pairs += pairs;
    return s;
}

}  // namespace

double default_scale(const AttentionParams& p) {
    return std::sqrt(static_cast<double>(p.w_q.cols() / p.heads));
}

AttentionScores attention_scores(const DenseMatrix& x, const AttentionParams& p, double scale,
                                 AttentionCost* cost) {
    check_input(x, p, scale);
    AttentionScores s;
    s.matrix = scores_from_qk(matmul(x, p.w_q), matmul(x, p.w_k), scale, cost);
    return s;
}

AttentionScores masked_attention_scores(const DenseMatrix& x, const AttentionParams& p,
                                        const Partition& partition, double scale,
                                        AttentionCost* cost) {
    check_input(x, p, scale);
    if (partition.assignment.size() != x.rows())
        throw std::invalid_argument("masked_attention_scores: partition size mismatch");
    AttentionScores s;
    s.matrix = masked_scores_from_qk(matmul(x, p.w_q), matmul(x, p.w_k), partition, scale, cost);
    s.masked = true;
    s.partition = partition;
    return s;
}

DenseMatrix approx_partitioned_scores(const AttentionScores& full, const Partition& partition,
                                      const DenseMatrix& x, const AttentionParams& p,
                                      double scale) {
    if (full.masked)
        throw std::invalid_argument("approx_partitioned_scores: input scores must be unmasked");
    const std::size_t n = x.rows();
    if (full.matrix.rows() != n || full.matrix.cols() != n || partition.assignment.size() != n)
        throw std::invalid_argument("approx_partitioned_scores: size mismatch");
    const std::size_t c = partition.c;
    if (n % c != 0)
        throw std::invalid_argument("approx_partitioned_scores: partition must be exactly balanced");
    for (std::size_t sz : partition.sizes)
        if (sz != n / c)
            throw std::invalid_argument(
                "approx_partitioned_scores: partition must be exactly balanced");
    check_input(x, p, scale);

    const DenseMatrix q = matmul(x, p.w_q);
    const DenseMatrix k = matmul(x, p.w_k);
    const std::size_t dk = q.cols();
    // mean-pooled cluster-level queries/keys
    DenseMatrix qbar(c, dk), kbar(c, dk);
    for (std::size_t u = 0; u < n; ++u) {
        const int cu = partition.assignment[u];
        for (std::size_t t = 0; t < dk; ++t) {
            qbar(cu, t) += q(u, t);
            kbar(cu, t) += k(u, t);
        }
    }
    const double inv_sz = static_cast<double>(c) / static_cast<double>(n);
    for (std::size_t pi = 0; pi < c; ++pi)
        for (std::size_t t = 0; t < dk; ++t) {
            qbar(pi, t) *= inv_sz;
            kbar(pi, t) *= inv_sz;
        }
    // alpha = row softmax of cluster-level logits over all c clusters
    DenseMatrix alpha(c, c);
    for (std::size_t pi = 0; pi < c; ++pi) {
        std::vector<double> logits(c);
        for (std::size_t qi = 0; qi < c; ++qi) {
            double acc = 0.0;
            for (std::size_t t = 0; t < dk; ++t) acc += qbar(pi, t) * kbar(qi, t);
            logits[qi] = acc / scale;
        }
        double mx = logits[0];
        for (double v : logits) mx = std::max(mx, v);
        double sum = 0.0;
        for (double v : logits) sum += std::exp(v - mx);
        for (std::size_t qi = 0; qi < c; ++qi) alpha(pi, qi) = std::exp(logits[qi] - mx) / sum;
    }

    const double cluster_size = static_cast<double>(n) / static_cast<double>(c);
    DenseMatrix approx(n, n);
    for (std::size_t u = 0; u < n; ++u) {
        const int pu = partition.assignment[u];
        for (std::size_t v = 0; v < n; ++v) {
            const int pv = partition.assignment[v];
            approx(u, v) = pu == pv ? full.matrix(u, v) : alpha(pu, pv) / cluster_size;
        }
    }
    return approx;
}

DenseMatrix forward(const DenseMatrix& x, const AttentionParams& p, const FFNParams& ffn,
                    const Partition* partition, double scale, AttentionCost* cost,
                    LayerCache* cache) {
    check_input(x, p, scale);
    const std::size_t n = x.rows();
    const std::size_t dv = p.w_v.cols();
    if (ffn.w1.rows() != dv) throw std::invalid_argument("forward: FFN W1 rows != d_v");
    if (ffn.b1.size() != ffn.w1.cols() || ffn.w2.rows() != ffn.w1.cols() ||
        ffn.b2.size() != ffn.w2.cols())
        throw std::invalid_argument("forward: FFN dimension chain inconsistent");
    if (ffn.w2.cols() != dv)
        throw std::invalid_argument("forward: residual requires d_out == d_v");
    if (partition && partition->assignment.size() != n)
        throw std::invalid_argument("forward: partition size mismatch");

    const std::size_t heads = p.heads;
    const std::size_t dkh = p.w_q.cols() / heads;
    const std::size_t dvh = dv / heads;

    LayerCache local;
    LayerCache& cc = cache ? *cache : local;
    cc.q = matmul(x, p.w_q);
    cc.k = matmul(x, p.w_k);
    cc.v = matmul(x, p.w_v);
    cc.head_scores.clear();
    cc.z = DenseMatrix(n, dv);

    for (std::size_t h = 0; h < heads; ++h) {
        const DenseMatrix qh = columns(cc.q, h * dkh, (h + 1) * dkh);
        const DenseMatrix kh = columns(cc.k, h * dkh, (h + 1) * dkh);
        const DenseMatrix vh = columns(cc.v, h * dvh, (h + 1) * dvh);
        DenseMatrix sh = partition ? masked_scores_from_qk(qh, kh, *partition, scale, cost)
                                   : scores_from_qk(qh, kh, scale, cost);
        const DenseMatrix zh = partition ? detail::block_av(sh, vh, *partition) : matmul(sh, vh);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < dvh; ++j) cc.z(i, h * dvh + j) = zh(i, j);
        cc.head_scores.push_back(std::move(sh));
    }

    cc.a1 = matmul(cc.z, ffn.w1);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < ffn.b1.size(); ++j) cc.a1(i, j) += ffn.b1[j];
    DenseMatrix relu = cc.a1;
    for (double& v : relu.data()) v = v > 0 ? v : 0.0;
    cc.out = matmul(relu, ffn.w2);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < ffn.b2.size(); ++j) cc.out(i, j) += ffn.b2[j];
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < dv; ++j) cc.out(i, j) += cc.z(i, j);
    return cc.out;
}

namespace detail {

DenseMatrix block_av(const DenseMatrix& scores, const DenseMatrix& v, const Partition& part) {
    const std::size_t n = scores.rows(), d = v.cols();
    DenseMatrix out(n, d);
    const auto members = cluster_members(part);
    for (const auto& cluster : members) {
        const std::size_t m = cluster.size();
        parallel_for_rows(m, [&](std::size_t r0, std::size_t r1) {
            for (std::size_t i = r0; i < r1; ++i) {
                const int u = cluster[i];
                const double* su = scores.row(u);
                double* ou = out.row(u);
                for (std::size_t j = 0; j < m; ++j) {
                    const int w = cluster[j];
                    const double s = su[w];
                    const double* vw = v.row(w);
                    for (std::size_t t = 0; t < d; ++t) ou[t] += s * vw[t];
                }
            }
        });
    }
    return out;
}

DenseMatrix block_outer(const DenseMatrix& dz, const DenseMatrix& v, const Partition& part) {
    const std::size_t n = dz.rows(), d = v.cols();
    DenseMatrix out(n, n);
    const auto members = cluster_members(part);
    for (const auto& cluster : members) {
        const std::size_t m = cluster.size();
        parallel_for_rows(m, [&](std::size_t r0, std::size_t r1) {
            for (std::size_t i = r0; i < r1; ++i) {
                const int u = cluster[i];
                const double* du = dz.row(u);
                double* ou = out.row(u);
                for (std::size_t j = 0; j < m; ++j) {
                    const int w = cluster[j];
                    const double* vw = v.row(w);
                    double acc = 0.0;
                    for (std::size_t t = 0; t < d; ++t) acc += du[t] * vw[t];
                    ou[w] = acc;
                }
            }
        });
    }
    return out;
}

DenseMatrix block_atv(const DenseMatrix& scores, const DenseMatrix& dz, const Partition& part) {
    const std::size_t n = scores.rows(), d = dz.cols();
    DenseMatrix out(n, d);
    const auto members = cluster_members(part);
    for (const auto& cluster : members) {
        const std::size_t m = cluster.size();
        parallel_for_rows(m, [&](std::size_t r0, std::size_t r1) {
            for (std::size_t j = r0; j < r1; ++j) {
                const int w = cluster[j];
                double* ow = out.row(w);
                for (std::size_t i = 0; i < m; ++i) {
                    const int u = cluster[i];
                    const double s = scores(u, w);
                    const double* du = dz.row(u);
                    for (std::size_t t = 0; t < d; ++t) ow[t] += s * du[t];
                }
            }
        });
    }
    return out;
}

}  // namespace detail

}  // namespace fairgp
