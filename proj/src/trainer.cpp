#include "fairgp/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "fairgp/rng.hpp"

namespace fairgp {

std::size_t default_cluster_count(std::size_t n) { return std::max<std::size_t>(2, n / 64); }

double cross_entropy(const DenseMatrix& logits, const std::vector<int>& targets) {
    if (targets.empty()) throw std::invalid_argument("cross_entropy: empty target set");
    if (logits.rows() != targets.size() || logits.cols() != 2)
        throw std::invalid_argument("cross_entropy: logits must be k×2 with k targets");
    double total = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const int y = targets[i];
        if (y < 0 || y > 1) throw std::invalid_argument("cross_entropy: targets must be binary");
        const double l0 = logits(i, 0), l1 = logits(i, 1);
        const double mx = std::max(l0, l1);
        const double lse = mx + std::log(std::exp(l0 - mx) + std::exp(l1 - mx));
        total += lse - logits(i, y);
    }
    return total / static_cast<double>(targets.size());
}

std::vector<int> binarize_labels(const std::vector<int>& raw) {
    std::vector<int> out(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (raw[i] < 0) throw std::invalid_argument("binarize_labels: negative label");
        out[i] = raw[i] == 0 ? 0 : 1;
    }
    return out;
}

SplitMasks make_splits(const Graph& g, std::uint64_t seed) {
    const std::size_t n = g.node_count();
    SplitMasks m{std::vector<bool>(n, false), std::vector<bool>(n, false),
                 std::vector<bool>(n, false)};
    Rng rng(seed);
    for (int cls = 0; cls <= 1; ++cls) {
        std::vector<NodeId> idx;
        for (NodeId v = 0; v < n; ++v)
            if (g.labels()[v] == cls) idx.push_back(v);
        if (idx.size() < 4)
            throw std::invalid_argument("make_splits: class " + std::to_string(cls) +
                                        " has fewer than 4 nodes");
        rng.shuffle(idx);
        const std::size_t nv = idx.size() / 4;
        const std::size_t nt = idx.size() / 4;
        const std::size_t ntrain = std::min<std::size_t>(
            static_cast<std::size_t>(std::ceil(0.5 * static_cast<double>(idx.size()))), 1000);
        std::size_t pos = 0;
        for (std::size_t i = 0; i < nv; ++i) m.val[idx[pos++]] = true;
        for (std::size_t i = 0; i < nt; ++i) m.test[idx[pos++]] = true;
        for (std::size_t i = 0; i < ntrain && pos < idx.size(); ++i) m.train[idx[pos++]] = true;
    }
    return m;
}

ModelParams zero_like(const ModelParams& p) {
    ModelParams g;
    for (const auto& layer : p.layers) {
        ModelParams::Layer zl;
        zl.attn.w_q = DenseMatrix(layer.attn.w_q.rows(), layer.attn.w_q.cols());
        zl.attn.w_k = DenseMatrix(layer.attn.w_k.rows(), layer.attn.w_k.cols());
        zl.attn.w_v = DenseMatrix(layer.attn.w_v.rows(), layer.attn.w_v.cols());
        zl.attn.heads = layer.attn.heads;
        zl.ffn.w1 = DenseMatrix(layer.ffn.w1.rows(), layer.ffn.w1.cols());
        zl.ffn.b1.assign(layer.ffn.b1.size(), 0.0);
        zl.ffn.w2 = DenseMatrix(layer.ffn.w2.rows(), layer.ffn.w2.cols());
        zl.ffn.b2.assign(layer.ffn.b2.size(), 0.0);
        g.layers.push_back(std::move(zl));
    }
    g.classifier_w = DenseMatrix(p.classifier_w.rows(), p.classifier_w.cols());
    g.classifier_b.assign(p.classifier_b.size(), 0.0);
    return g;
}

std::vector<std::vector<double>*> parameter_arrays(ModelParams& p) {
    std::vector<std::vector<double>*> out;
    for (auto& layer : p.layers) {
        out.push_back(&layer.attn.w_q.data());
        out.push_back(&layer.attn.w_k.data());
        out.push_back(&layer.attn.w_v.data());
        out.push_back(&layer.ffn.w1.data());
        out.push_back(&layer.ffn.b1);
        out.push_back(&layer.ffn.w2.data());
        out.push_back(&layer.ffn.b2);
    }
    out.push_back(&p.classifier_w.data());
    out.push_back(&p.classifier_b);
    return out;
}

namespace {

DenseMatrix standardize_columns(DenseMatrix x) {
    const std::size_t n = x.rows(), d = x.cols();
    if (n == 0) return x;
    for (std::size_t j = 0; j < d; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += x(i, j);
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double c = x(i, j) - mean;
            var += c * c;
        }
        const double sd = std::sqrt(var / static_cast<double>(n));
        const double inv = sd > 1e-12 ? 1.0 / sd : 0.0;
        for (std::size_t i = 0; i < n; ++i) x(i, j) = (x(i, j) - mean) * inv;
    }
    return x;
}

DenseMatrix init_weight(Rng& rng, std::size_t fan_in, std::size_t fan_out) {
    DenseMatrix w(fan_in, fan_out);
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (double& v : w.data()) v = rng.uniform(-bound, bound);
    return w;
}

ModelParams init_params(std::size_t d_in, const TrainConfig& cfg) {
    Rng rng(cfg.seed);
    ModelParams p;
    std::size_t cur = d_in;
    for (std::size_t l = 0; l < cfg.num_layers; ++l) {
        ModelParams::Layer layer;
        layer.attn.w_q = init_weight(rng, cur, cfg.hidden);
        layer.attn.w_k = init_weight(rng, cur, cfg.hidden);
        layer.attn.w_v = init_weight(rng, cur, cfg.hidden);
        layer.attn.heads = cfg.heads;
        layer.ffn.w1 = init_weight(rng, cfg.hidden, cfg.hidden);
        layer.ffn.b1.assign(cfg.hidden, 0.0);
        layer.ffn.w2 = init_weight(rng, cfg.hidden, cfg.hidden);
        layer.ffn.b2.assign(cfg.hidden, 0.0);
        p.layers.push_back(std::move(layer));
        cur = cfg.hidden;
    }
    p.classifier_w = init_weight(rng, cur, 2);
    p.classifier_b.assign(2, 0.0);
    return p;
}

struct ForwardState {
    std::vector<LayerCache> caches;
    DenseMatrix final_hidden;
    DenseMatrix logits;
};

ForwardState forward_model(const DenseMatrix& x, const ModelParams& p, const Partition* part,
                           double scale) {
    ForwardState st;
    const DenseMatrix* cur = &x;
    st.caches.resize(p.layers.size());
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        forward(*cur, p.layers[l].attn, p.layers[l].ffn, part, scale, nullptr, &st.caches[l]);
        cur = &st.caches[l].out;
    }
    st.final_hidden = *cur;
    st.logits = matmul(st.final_hidden, p.classifier_w);
    for (std::size_t i = 0; i < st.logits.rows(); ++i)
        for (std::size_t j = 0; j < 2; ++j) st.logits(i, j) += p.classifier_b[j];
    return st;
}

// Backward through the softmax attention rows. Masked rows only touch their
// cluster's entries; zero entries contribute nothing either way.
DenseMatrix softmax_backward(const DenseMatrix& scores, const DenseMatrix& dscores,
                             const Partition* part) {
    const std::size_t n = scores.rows();
    DenseMatrix dlogits(n, n);
    if (!part) {
        for (std::size_t u = 0; u < n; ++u) {
            const double* s = scores.row(u);
            const double* ds = dscores.row(u);
            double dot = 0.0;
            for (std::size_t v = 0; v < n; ++v) dot += ds[v] * s[v];
            double* dl = dlogits.row(u);
            for (std::size_t v = 0; v < n; ++v) dl[v] = s[v] * (ds[v] - dot);
        }
        return dlogits;
    }
    std::vector<std::vector<int>> members(part->c);
    for (std::size_t u = 0; u < n; ++u)
        members[part->assignment[u]].push_back(static_cast<int>(u));
    for (const auto& cluster : members) {
        for (int u : cluster) {
            const double* s = scores.row(u);
            const double* ds = dscores.row(u);
            double dot = 0.0;
            for (int v : cluster) dot += ds[v] * s[v];
            double* dl = dlogits.row(u);
            for (int v : cluster) dl[v] = s[v] * (ds[v] - dot);
        }
    }
    return dlogits;
}

// Accumulates this layer's parameter gradients into `grad` and returns the
// gradient w.r.t. the layer input.
DenseMatrix backward_layer(const DenseMatrix& x, const ModelParams::Layer& layer,
                           const LayerCache& cache, const Partition* part, double scale,
                           const DenseMatrix& dout, ModelParams::Layer& grad) {
    const std::size_t n = x.rows();
    const std::size_t dv = layer.attn.w_v.cols();
    const std::size_t heads = layer.attn.heads;
    const std::size_t dkh = layer.attn.w_q.cols() / heads;
    const std::size_t dvh = dv / heads;

    // FFN with residual: out = relu(z·w1 + b1)·w2 + b2 + z
    DenseMatrix relu = cache.a1;
    for (double& v : relu.data()) v = v > 0 ? v : 0.0;
    const DenseMatrix& dm = dout;
    grad.ffn.w2 = matmul_transa(relu, dm);
    for (std::size_t j = 0; j < grad.ffn.b2.size(); ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += dm(i, j);
        grad.ffn.b2[j] = acc;
    }
    DenseMatrix da1 = matmul_transb(dm, layer.ffn.w2);
    for (std::size_t i = 0; i < da1.data().size(); ++i)
        if (cache.a1.data()[i] <= 0) da1.data()[i] = 0.0;
    grad.ffn.w1 = matmul_transa(cache.z, da1);
    for (std::size_t j = 0; j < grad.ffn.b1.size(); ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += da1(i, j);
        grad.ffn.b1[j] = acc;
    }
    DenseMatrix dz = matmul_transb(da1, layer.ffn.w1);
    for (std::size_t i = 0; i < dz.data().size(); ++i) dz.data()[i] += dout.data()[i];

    // attention backward per head
    DenseMatrix dq(n, layer.attn.w_q.cols()), dk(n, layer.attn.w_k.cols()), dvm(n, dv);
    for (std::size_t h = 0; h < heads; ++h) {
        const DenseMatrix qh = columns(cache.q, h * dkh, (h + 1) * dkh);
        const DenseMatrix kh = columns(cache.k, h * dkh, (h + 1) * dkh);
        const DenseMatrix vh = columns(cache.v, h * dvh, (h + 1) * dvh);
        DenseMatrix dzh(n, dvh);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < dvh; ++j) dzh(i, j) = dz(i, h * dvh + j);
        const DenseMatrix& sh = cache.head_scores[h];
        const DenseMatrix dsh =
            part ? detail::block_outer(dzh, vh, *part) : matmul_transb(dzh, vh);
        const DenseMatrix dvh_m =
            part ? detail::block_atv(sh, dzh, *part) : matmul_transa(sh, dzh);
        const DenseMatrix dlogits = softmax_backward(sh, dsh, part);
        const DenseMatrix dqh = part ? detail::block_av(dlogits, kh, *part) : matmul(dlogits, kh);
        const DenseMatrix dkh_m =
            part ? detail::block_atv(dlogits, qh, *part) : matmul_transa(dlogits, qh);
        const double inv_scale = 1.0 / scale;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < dkh; ++j) {
                dq(i, h * dkh + j) = dqh(i, j) * inv_scale;
                dk(i, h * dkh + j) = dkh_m(i, j) * inv_scale;
            }
            for (std::size_t j = 0; j < dvh; ++j) dvm(i, h * dvh + j) = dvh_m(i, j);
        }
    }

    grad.attn.w_q = matmul_transa(x, dq);
    grad.attn.w_k = matmul_transa(x, dk);
    grad.attn.w_v = matmul_transa(x, dvm);

    DenseMatrix dx = matmul_transb(dq, layer.attn.w_q);
    const DenseMatrix dx_k = matmul_transb(dk, layer.attn.w_k);
    const DenseMatrix dx_v = matmul_transb(dvm, layer.attn.w_v);
    for (std::size_t i = 0; i < dx.data().size(); ++i)
        dx.data()[i] += dx_k.data()[i] + dx_v.data()[i];
    return dx;
}

}  // namespace

double loss_and_gradients(const DenseMatrix& x, const std::vector<int>& labels,
                          const std::vector<bool>& train_mask, const ModelParams& params_in,
                          const Partition* mask_partition, double scale, ModelParams* grads) {
    const std::size_t n = x.rows();
    if (labels.size() != n || train_mask.size() != n)
        throw std::invalid_argument("loss_and_gradients: size mismatch");
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < n; ++i)
        if (train_mask[i]) rows.push_back(i);
    if (rows.empty()) throw std::invalid_argument("loss_and_gradients: empty mask");

    const ModelParams& params = params_in;
    const ForwardState st = forward_model(x, params, mask_partition, scale);

    const std::size_t k = rows.size();
    double loss = 0.0;
    DenseMatrix dlogits(n, 2);
    for (std::size_t r : rows) {
        const int y = labels[r];
        const double l0 = st.logits(r, 0), l1 = st.logits(r, 1);
        const double mx = std::max(l0, l1);
        const double e0 = std::exp(l0 - mx), e1 = std::exp(l1 - mx);
        const double sum = e0 + e1;
        loss += mx + std::log(sum) - st.logits(r, y);
        dlogits(r, 0) = (e0 / sum - (y == 0 ? 1.0 : 0.0)) / static_cast<double>(k);
        dlogits(r, 1) = (e1 / sum - (y == 1 ? 1.0 : 0.0)) / static_cast<double>(k);
    }
    loss /= static_cast<double>(k);

    if (grads) {
        *grads = zero_like(params);
        grads->classifier_w = matmul_transa(st.final_hidden, dlogits);
        for (std::size_t j = 0; j < 2; ++j) {
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) acc += dlogits(i, j);
            grads->classifier_b[j] = acc;
        }
        DenseMatrix dcur = matmul_transb(dlogits, params.classifier_w);
        for (std::size_t l = params.layers.size(); l-- > 0;) {
            const DenseMatrix& layer_in = l == 0 ? x : st.caches[l - 1].out;
            dcur = backward_layer(layer_in, params.layers[l], st.caches[l], mask_partition,
                                  scale, dcur, grads->layers[l]);
        }
    }
    return loss;
}

PreparedInputs prepare_inputs(const Graph& g, const TrainConfig& cfg,
                              const PartitionConfig& pcfg, const SpectralConfig& scfg) {
    PreparedInputs in;
    if (cfg.ablations.no_fm || scfg.t == 0) {
        in.x = standardize_columns(g.features());
    } else {
        const EigenResult eig = top_eigenpairs(g, scfg.t, scfg.tol, scfg.max_iter);
        in.x = standardize_columns(fuse_features(g, eig));
    }
    if (!cfg.ablations.no_gp && pcfg.strategy != PartitionStrategy::kNone) {
        const std::size_t c =
            pcfg.clusters > 0 ? pcfg.clusters : default_cluster_count(g.node_count());
        switch (pcfg.strategy) {
            case PartitionStrategy::kMultilevel:
                in.partition = partition_multilevel(g, c, pcfg.balance_eps, pcfg.seed);
                break;
            case PartitionStrategy::kLouvain:
                in.partition = partition_louvain(g, c, pcfg.seed);
                break;
            case PartitionStrategy::kRandom:
                in.partition = partition_random(g, c, pcfg.seed);
                break;
            case PartitionStrategy::kNone:
                break;
        }
    }
    in.mask_attention = in.partition.has_value() && !cfg.ablations.no_ao;
    return in;
}

std::pair<ModelParams, TrainTrace> train(const Graph& g, const TrainConfig& cfg,
                                         const PartitionConfig& pcfg,
                                         const SpectralConfig& scfg) {
    const std::size_t n = g.node_count();
    if (cfg.epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
    if (!(cfg.lr > 0)) throw std::invalid_argument("train: lr must be positive");
    if (g.masks().empty()) throw std::invalid_argument("train: graph has no split masks");

    std::size_t train_count = 0, train_pos = 0;
    for (std::size_t v = 0; v < n; ++v)
        if (g.masks().train[v]) {
            ++train_count;
            train_pos += g.labels()[v] == 1;
        }
    if (train_count == 0 || train_pos == 0 || train_pos == train_count)
        throw std::invalid_argument("train: train mask must contain both classes");

    PreparedInputs in = prepare_inputs(g, cfg, pcfg, scfg);
    const Partition* mask_part = in.mask_attention ? &*in.partition : nullptr;

    ModelParams params = init_params(in.x.cols(), cfg);
    const double scale = cfg.scale_by_n ? std::sqrt(static_cast<double>(n))
                         : params.layers.empty()
                             ? 1.0
                             : default_scale(params.layers.front().attn);

    ModelParams grads = zero_like(params);
    std::vector<std::vector<double>> adam_m, adam_v;
    for (auto* arr : parameter_arrays(params)) {
        adam_m.emplace_back(arr->size(), 0.0);
        adam_v.emplace_back(arr->size(), 0.0);
    }

    TrainTrace trace;
    trace.partition = in.partition;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double loss = loss_and_gradients(in.x, g.labels(), g.masks().train, params,
                                               mask_part, scale, &grads);
        if (!std::isfinite(loss))
            throw std::runtime_error("train: diverged (non-finite loss) at epoch " +
                                     std::to_string(epoch));
        trace.train_loss.push_back(loss);

        const auto pvals = parameter_arrays(params);
        const auto gvals = parameter_arrays(grads);
        if (cfg.optimizer == Optimizer::kSgd) {
            for (std::size_t a = 0; a < pvals.size(); ++a)
                for (std::size_t i = 0; i < pvals[a]->size(); ++i)
                    (*pvals[a])[i] -= cfg.lr * (*gvals[a])[i];
        } else {
            const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
            const double t = static_cast<double>(epoch + 1);
            const double corr1 = 1.0 - std::pow(b1, t);
            const double corr2 = 1.0 - std::pow(b2, t);
            for (std::size_t a = 0; a < pvals.size(); ++a) {
                auto& m = adam_m[a];
                auto& v = adam_v[a];
                for (std::size_t i = 0; i < pvals[a]->size(); ++i) {
                    const double gr = (*gvals[a])[i];
                    m[i] = b1 * m[i] + (1 - b1) * gr;
                    v[i] = b2 * v[i] + (1 - b2) * gr * gr;
                    (*pvals[a])[i] -= cfg.lr * (m[i] / corr1) / (std::sqrt(v[i] / corr2) + eps);
                }
            }
        }
    }
    return {std::move(params), std::move(trace)};
}

Predictions predict_on(const PreparedInputs& in, const ModelParams& params, bool scale_by_n) {
    const Partition* mask_part = in.mask_attention ? &*in.partition : nullptr;
    const std::size_t n = in.x.rows();
    const double scale = scale_by_n ? std::sqrt(static_cast<double>(n))
                         : params.layers.empty() ? 1.0
                                                 : default_scale(params.layers.front().attn);
    const ForwardState st = forward_model(in.x, params, mask_part, scale);
    Predictions out;
    out.prob_class1.resize(n);
    out.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double l0 = st.logits(i, 0), l1 = st.logits(i, 1);
        const double mx = std::max(l0, l1);
        const double e0 = std::exp(l0 - mx), e1 = std::exp(l1 - mx);
        out.prob_class1[i] = e1 / (e0 + e1);
        out.labels[i] = l1 > l0 ? 1 : 0;  // ties toward class 0
    }
    return out;
}

Predictions predict(const Graph& g, const ModelParams& params, const TrainConfig& cfg,
                    const PartitionConfig& pcfg, const SpectralConfig& scfg) {
    const PreparedInputs in = prepare_inputs(g, cfg, pcfg, scfg);
    return predict_on(in, params, cfg.scale_by_n);
}

}  // namespace fairgp
