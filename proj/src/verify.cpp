#include "fairgp/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "fairgp/attention.hpp"
#include "fairgp/data_io.hpp"
#include "fairgp/harness.hpp"
#include "fairgp/metrics.hpp"
#include "fairgp/partition.hpp"
#include "fairgp/rng.hpp"
#include "fairgp/spectral.hpp"
#include "fairgp/theory.hpp"
#include "fairgp/trainer.hpp"

namespace fairgp::verify {

// ---------------------------------------------------------------------------
// Oracles. Each is a deliberately naive, independent route.
// ---------------------------------------------------------------------------

DenseEig jacobi_eigensolver(DenseMatrix a) {
    const std::size_t n = a.rows();
    if (a.cols() != n) throw std::invalid_argument("jacobi_eigensolver: square matrix required");
    DenseMatrix v = DenseMatrix::identity(n);
    for (int sweep = 0; sweep < 200; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (off < 1e-26) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::fabs(a(p, q)) < 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });
    DenseEig res;
    res.vectors = DenseMatrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        res.values.push_back(a(order[j], order[j]));
        for (std::size_t i = 0; i < n; ++i) res.vectors(i, j) = v(i, order[j]);
    }
    return res;
}

std::size_t brute_force_min_cut_2way(const Graph& g) {
    const std::size_t n = g.node_count();
    if (n % 2 != 0 || n > 24)
        throw std::invalid_argument("brute_force_min_cut_2way: even n <= 24 required");
    std::size_t best = g.edge_count() + 1;
    for (std::uint32_t bits = 0; bits < (1u << n); ++bits) {
        if (static_cast<std::size_t>(__builtin_popcount(bits)) != n / 2) continue;
        std::size_t cut = 0;
        g.for_each_edge([&](NodeId u, NodeId v) {
            if (((bits >> u) & 1u) != ((bits >> v) & 1u)) ++cut;
        });
        best = std::min(best, cut);
    }
    return best;
}

double brute_force_delta_sp(const std::vector<int>& pred, const std::vector<int>& sensitive) {
    std::size_t n0 = 0, n1 = 0, p0 = 0, p1 = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (sensitive[i] == 0) {
            ++n0;
            p0 += pred[i] == 1;
        } else {
            ++n1;
            p1 += pred[i] == 1;
        }
    }
    if (n0 == 0 || n1 == 0) return -1.0;
    return std::fabs(static_cast<double>(p0) / static_cast<double>(n0) -
                     static_cast<double>(p1) / static_cast<double>(n1));
}

double brute_force_delta_eo(const std::vector<int>& pred, const std::vector<int>& labels,
                            const std::vector<int>& sensitive) {
    std::vector<int> p2, s2;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (labels[i] != 1) continue;
        p2.push_back(pred[i]);
        s2.push_back(sensitive[i]);
    }
    return brute_force_delta_sp(p2, s2);
}

double projector_distance(const DenseMatrix& a, const DenseMatrix& b) {
    // max over columns of a of || b bT a_col - a_col ||: containment of span(a)
    // in span(b) when b's columns are orthonormal
    double worst = 0.0;
    const std::size_t n = a.rows();
    for (std::size_t j = 0; j < a.cols(); ++j) {
        std::vector<double> col(n), proj(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) col[i] = a(i, j);
        for (std::size_t k = 0; k < b.cols(); ++k) {
            double dot = 0.0;
            for (std::size_t i = 0; i < n; ++i) dot += b(i, k) * col[i];
            for (std::size_t i = 0; i < n; ++i) proj[i] += dot * b(i, k);
        }
        double r2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = proj[i] - col[i];
            r2 += d * d;
        }
        worst = std::max(worst, std::sqrt(r2));
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Acceptance criteria
// ---------------------------------------------------------------------------

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

Graph random_er_graph(Rng& rng, std::size_t n, double p, std::size_t d) {
    DenseMatrix feats(n, d);
    for (double& v : feats.data()) v = rng.normal();
    std::vector<int> s(n), y(n, 0);
    std::size_t ones = 0;
    for (auto& v : s) ones += (v = rng.bernoulli(0.5) ? 1 : 0);
    if (ones == 0) s[0] = 1;
    if (ones == n) s[0] = 0;
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (NodeId u = 0; u < n; ++u)
        for (NodeId v = u + 1; v < n; ++v)
            if (rng.bernoulli(p)) edges.push_back({u, v});
    return build_graph(edges, std::move(feats), std::move(s), std::move(y));
}

AttentionParams random_attention(Rng& rng, std::size_t d_in, std::size_t d_out) {
    AttentionParams p;
    p.w_q = DenseMatrix(d_in, d_out);
    p.w_k = DenseMatrix(d_in, d_out);
    p.w_v = DenseMatrix(d_in, d_out);
    const double bound = 1.0 / std::sqrt(static_cast<double>(d_in));
    for (double& v : p.w_q.data()) v = rng.normal() * bound;
    for (double& v : p.w_k.data()) v = rng.normal() * bound;
    for (double& v : p.w_v.data()) v = rng.normal() * bound;
    return p;
}

// The synthetic benchmark configuration for the directional criteria
// (the generator defaults, pinned here explicitly).
SyntheticConfig benchmark_config() {
    SyntheticConfig cfg;
    cfg.n = 2000;
    cfg.blocks = 16;
    cfg.intra_p = 0.02;
    cfg.inter_p = 0.008;
    cfg.sensitive_skew = std::vector<double>(16, 0.45);
    for (std::size_t b = 0; b < 10; ++b) cfg.sensitive_skew[b] = 0.8;
    cfg.hub_fraction = 0.08;
    cfg.hub_degree_boost = 10.0;
    cfg.label_bias = 0.45;
    cfg.label_signal = 0.4;
    cfg.noise_features = 3;
    return cfg;
}

TrainConfig benchmark_train_config() {
    TrainConfig t;
    t.epochs = 60;
    t.hidden = 32;
    t.lr = 1e-3;
    return t;
}

struct ArmOutcome {
    double acc = 0.0;
    double dsp = 0.0;
};

ArmOutcome run_arm(const Graph& g, const TrainConfig& base, const AblationFlags& flags,
                   std::uint64_t seed) {
    TrainConfig tc = base;
    tc.seed = seed;
    tc.ablations = flags;
    PartitionConfig pc;
    pc.strategy = PartitionStrategy::kMultilevel;
    pc.clusters = 32;
    pc.seed = seed;
    SpectralConfig sc;
    auto [params, trace] = train(g, tc, pc, sc);
    const Predictions pred = predict(g, params, tc, pc, sc);
    ArmOutcome out;
    out.acc = accuracy(pred.labels, g.labels(), g.masks().test);
    out.dsp = delta_sp(pred.labels, g.sensitive(), g.masks().test).value_or(0.0);
    return out;
}

double median(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

std::string read_file_bytes(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

CriterionResult criterion_theorem1_lemma1(int id, bool lemma) {
    CriterionResult r;
    r.id = id;
    r.name = lemma ? "Lemma-1 sweep" : "Theorem-1 sweep";
    const auto t0 = Clock::now();
    Rng rng(lemma ? 0xA11CEull : 0xB0B5ull);
    std::size_t violations = 0;
    double worst_margin = HUGE_VAL;
    const std::size_t count = 200;
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t n = 4 + rng.index(61);  // 4..64
        const std::size_t d = 2 + rng.index(5);
        DenseMatrix x(n, d);
        for (double& v : x.data()) v = rng.normal();
        const AttentionParams params = random_attention(rng, d, d);
        std::vector<int> s(n);
        std::size_t ones = 0;
        for (auto& v : s) ones += (v = rng.bernoulli(0.5) ? 1 : 0);
        if (ones == 0) s[0] = 1;
        if (ones == n) s[0] = 0;
        const AttentionScores sc = attention_scores(x, params, std::sqrt(double(d)));
        const BoundReport rep = lemma ? check_lemma1(sc.matrix, s) : check_theorem1(sc.matrix, s);
        violations += !rep.satisfied;
        worst_margin = std::min(worst_margin, rep.margin);
    }
    const double secs = seconds_since(t0);
    r.passed = violations == 0 && secs < 30.0;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%zu instances, %zu violations, worst margin %.3g, %.2fs",
                  count, violations, worst_margin, secs);
    r.detail = buf;
    return r;
}

CriterionResult criterion_theorem2() {
    CriterionResult r;
    r.id = 3;
    r.name = "Theorem-2 sweep";
    SweepConfig cfg;
    cfg.instances = 100;
    cfg.seed = 0x72ull;
    const SweepResult sw = sweep_bounds(cfg);
    std::size_t t2_viol = 0;
    double worst = HUGE_VAL;
    for (const auto& rep : sw.reports) {
        if (rep.bound != "theorem2") continue;
        t2_viol += !rep.satisfied;
        worst = std::min(worst, rep.margin);
    }
    r.passed = t2_viol == 0;
    char buf[200];
    std::snprintf(buf, sizeof buf, "100 instances, %zu violations, worst margin %.3g", t2_viol,
                  worst);
    r.detail = buf;
    return r;
}

CriterionResult criterion_gradcheck() {
    CriterionResult r;
    r.id = 4;
    r.name = "Gradient check";
    Rng rng(0x6badull);
    double worst_rel = 0.0;
    const double h = 1e-5;
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 4 + rng.index(5);  // 4..8
        const std::size_t d = 2 + rng.index(3);  // 2..4
        const std::size_t hidden = 4;
        DenseMatrix x(n, d);
        for (double& v : x.data()) v = rng.normal();
        std::vector<int> labels(n);
        bool has0 = false, has1 = false;
        for (auto& y : labels) {
            y = rng.bernoulli(0.5) ? 1 : 0;
            (y ? has1 : has0) = true;
        }
        if (!has0) labels[0] = 0;
        if (!has1) labels[1 % n] = 1;
        std::vector<bool> mask(n, true);

        TrainConfig tc;
        tc.hidden = hidden;
        tc.heads = trial % 2 == 0 ? 1 : 2;
        tc.seed = rng.next_u64();
        tc.num_layers = 1;
        ModelParams params;
        {
            Rng wr(tc.seed);
            ModelParams::Layer layer;
            auto mk = [&](std::size_t fi, std::size_t fo) {
                DenseMatrix w(fi, fo);
                const double bound = 1.0 / std::sqrt(double(fi));
                for (double& v : w.data()) v = wr.uniform(-bound, bound);
                return w;
            };
            layer.attn.w_q = mk(d, hidden);
            layer.attn.w_k = mk(d, hidden);
            layer.attn.w_v = mk(d, hidden);
            layer.attn.heads = tc.heads;
            layer.ffn.w1 = mk(hidden, hidden);
            layer.ffn.b1.assign(hidden, 0.0);
            layer.ffn.w2 = mk(hidden, hidden);
            layer.ffn.b2.assign(hidden, 0.0);
            params.layers.push_back(std::move(layer));
            params.classifier_w = mk(hidden, 2);
            params.classifier_b.assign(2, 0.0);
        }

        // alternate between masked and full attention
        Partition part;
        const Partition* pp = nullptr;
        if (trial % 3 == 0 && n >= 4) {
            part.c = 2;
            part.assignment.resize(n);
            for (std::size_t i = 0; i < n; ++i) part.assignment[i] = static_cast<int>(i % 2);
            part.sizes.assign(2, 0);
            for (int a : part.assignment) ++part.sizes[a];
            pp = &part;
        }
        const double scale = std::sqrt(static_cast<double>(hidden) / tc.heads);

        ModelParams grads = zero_like(params);
        loss_and_gradients(x, labels, mask, params, pp, scale, &grads);

        const auto pa = parameter_arrays(params);
        const auto ga = parameter_arrays(grads);
        for (std::size_t a = 0; a < pa.size(); ++a) {
            for (std::size_t i = 0; i < pa[a]->size(); ++i) {
                const double orig = (*pa[a])[i];
                (*pa[a])[i] = orig + h;
                const double lp = loss_and_gradients(x, labels, mask, params, pp, scale, nullptr);
                (*pa[a])[i] = orig - h;
                const double lm = loss_and_gradients(x, labels, mask, params, pp, scale, nullptr);
                (*pa[a])[i] = orig;
                const double fd = (lp - lm) / (2 * h);
                const double an = (*ga[a])[i];
                const double rel = std::fabs(fd - an) / std::max({1e-8, std::fabs(fd), std::fabs(an)});
                worst_rel = std::max(worst_rel, rel);
            }
        }
    }
    r.passed = worst_rel <= 1e-4;
    char buf[120];
    std::snprintf(buf, sizeof buf, "20 models, max relative error %.3g", worst_rel);
    r.detail = buf;
    return r;
}

CriterionResult criterion_metric_oracle() {
    CriterionResult r;
    r.id = 5;
    r.name = "Metric oracle equivalence";
    const std::vector<int> sensitive = {0, 0, 0, 1, 1, 1, 0, 1};
    const std::vector<int> labels = {1, 0, 1, 1, 0, 1, 0, 0};
    const std::size_t n = 8;
    std::size_t mismatches = 0;
    for (std::uint32_t bits = 0; bits < (1u << n); ++bits) {
        std::vector<int> pred(n);
        for (std::size_t i = 0; i < n; ++i) pred[i] = (bits >> i) & 1u;
        const auto sp = delta_sp(pred, sensitive);
        const double sp_oracle = brute_force_delta_sp(pred, sensitive);
        if (!sp || *sp != sp_oracle) ++mismatches;
        const auto eo = delta_eo(pred, labels, sensitive);
        const double eo_oracle = brute_force_delta_eo(pred, labels, sensitive);
        if (eo_oracle < 0) {
            if (eo) ++mismatches;
        } else if (!eo || *eo != eo_oracle) {
            ++mismatches;
        }
    }
    r.passed = mismatches == 0;
    r.detail = "256 prediction vectors, " + std::to_string(mismatches) + " mismatches";
    return r;
}

CriterionResult criterion_partition_validity() {
    CriterionResult r;
    r.id = 6;
    r.name = "Partition validity";
    Rng rng(0x9a97ull);
    std::size_t failures = 0;
    std::string first;
    for (int i = 0; i < 500; ++i) {
        const std::size_t n = 2 + rng.index(119);
        const double p = 0.02 + 0.2 * rng.uniform();
        Graph g = random_er_graph(rng, n, p, 2);
        const std::size_t c = 1 + rng.index(std::min<std::size_t>(n, 12));
        const std::uint64_t seed = rng.next_u64();
        const int strategy = static_cast<int>(rng.index(3));
        try {
            Partition part;
            const double eps = 0.05;
            if (strategy == 0)
                part = partition_multilevel(g, c, eps, seed);
            else if (strategy == 1)
                part = partition_louvain(g, c, seed);
            else
                part = partition_random(g, c, seed);
            validate_partition(g, part);
            if (strategy == 0) {
                const std::size_t cap = std::max<std::size_t>(
                    (n + c - 1) / c,
                    static_cast<std::size_t>(std::floor((1.0 + eps) * double(n) / double(c))));
                for (std::size_t s : part.sizes)
                    if (s > cap) throw std::runtime_error("multilevel balance bound violated");
            } else if (strategy == 2) {
                std::size_t mn = n, mx = 0;
                for (std::size_t s : part.sizes) {
                    mn = std::min(mn, s);
                    mx = std::max(mx, s);
                }
                if (mx - mn > 1) throw std::runtime_error("random sizes differ by more than 1");
            }
        } catch (const std::exception& e) {
            ++failures;
            if (first.empty())
                first = std::string(e.what()) + " (case " + std::to_string(i) + ")";
        }
    }
    r.passed = failures == 0;
    r.detail = "500 cases, " + std::to_string(failures) + " failures" +
               (first.empty() ? "" : "; first: " + first);
    return r;
}

CriterionResult criterion_partition_quality() {
    CriterionResult r;
    r.id = 7;
    r.name = "Partition quality";
    // two triangles joined by one bridge
    const std::vector<std::pair<NodeId, NodeId>> edges = {{0, 1}, {0, 2}, {1, 2}, {2, 3},
                                                          {3, 4}, {3, 5}, {4, 5}};
    Graph fixture = build_graph(edges, DenseMatrix(6, 1), std::vector<int>(6, 0),
                                std::vector<int>(6, 0));
    const Partition p2 = partition_multilevel(fixture, 2, 0.0, 1);
    const std::size_t cut = quality(fixture, p2).edge_cut;
    const std::size_t best = brute_force_min_cut_2way(fixture);
    const bool fixture_ok = cut == 1 && best == 1;

    Rng rng(0xE19ull);
    std::vector<double> ml_cuts, rnd_cuts;
    for (int seed = 0; seed < 20; ++seed) {
        Graph g = random_er_graph(rng, 200, 0.05, 2);
        ml_cuts.push_back(static_cast<double>(
            quality(g, partition_multilevel(g, 8, 0.05, seed)).edge_cut));
        rnd_cuts.push_back(
            static_cast<double>(quality(g, partition_random(g, 8, seed)).edge_cut));
    }
    const double ml_med = median(ml_cuts), rnd_med = median(rnd_cuts);
    const bool er_ok = ml_med <= rnd_med;
    r.passed = fixture_ok && er_ok;
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "bridge fixture cut=%zu (optimum %zu); ER median cut multilevel=%.0f random=%.0f",
                  cut, best, ml_med, rnd_med);
    r.detail = buf;
    return r;
}

CriterionResult criterion_eigen_oracle() {
    CriterionResult r;
    r.id = 8;
    r.name = "Eigen oracle";
    Rng rng(0xE16ull);
    double worst_val = 0.0, worst_vec = 0.0;
    std::string err;
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 2 + rng.index(11);  // 2..12
        const double p = 0.2 + 0.6 * rng.uniform();
        Graph g = random_er_graph(rng, n, p, 1);
        const std::size_t t = 1 + rng.index(n);
        EigenResult mine;
        try {
            mine = top_eigenpairs(g, t, 1e-11, 200000);
        } catch (const std::exception& e) {
            err = e.what();
            break;
        }
        DenseMatrix a(n, n);
        for (NodeId u = 0; u < n; ++u)
            for (NodeId v : g.neighbors(u)) a(u, v) = 1.0;
        const DenseEig oracle = jacobi_eigensolver(a);
        for (std::size_t j = 0; j < t; ++j)
            worst_val = std::max(worst_val, std::fabs(mine.values[j] - oracle.values[j]));
        // subspace containment per numerically-degenerate eigenvalue group
        std::size_t a0 = 0;
        while (a0 < t) {
            std::size_t b0 = a0 + 1;
            while (b0 < n && std::fabs(oracle.values[b0] - oracle.values[a0]) < 1e-6) ++b0;
            const DenseMatrix mine_grp = columns(mine.vectors, a0, std::min(b0, t));
            const DenseMatrix oracle_grp = columns(oracle.vectors, a0, b0);
            worst_vec = std::max(worst_vec, projector_distance(mine_grp, oracle_grp));
            a0 = b0;
        }
    }
    r.passed = err.empty() && worst_val <= 1e-8 && worst_vec <= 1e-6;
    char buf[200];
    if (err.empty())
        std::snprintf(buf, sizeof buf, "50 graphs, max eigenvalue err %.3g, max subspace resid %.3g",
                      worst_val, worst_vec);
    else
        std::snprintf(buf, sizeof buf, "solver failure: %s", err.c_str());
    r.detail = buf;
    return r;
}

struct DirectionalData {
    std::vector<double> dsp_fair, dsp_nogp, dsp_nofm, dsp_noao;
    std::vector<double> acc_fair, acc_nogp;
    double seconds_crit9 = 0.0;
};

DirectionalData run_directional(std::size_t seeds, const TrainConfig& base) {
    DirectionalData d;
    const SyntheticConfig synth = benchmark_config();
    for (std::size_t seed = 0; seed < seeds; ++seed) {
        SyntheticConfig sc = synth;
        sc.seed = seed;
        Graph g = generate_synthetic(sc);
        g.set_masks(make_splits(g, seed));

        const auto t0 = Clock::now();
        const ArmOutcome fair = run_arm(g, base, AblationFlags{}, seed);
        AblationFlags nogp;
        nogp.no_gp = true;
        const ArmOutcome vanilla = run_arm(g, base, nogp, seed);
        d.seconds_crit9 += seconds_since(t0);

        AblationFlags nofm;
        nofm.no_fm = true;
        const ArmOutcome wofm = run_arm(g, base, nofm, seed);
        AblationFlags noao;
        noao.no_ao = true;
        const ArmOutcome woao = run_arm(g, base, noao, seed);

        d.dsp_fair.push_back(fair.dsp);
        d.dsp_nogp.push_back(vanilla.dsp);
        d.dsp_nofm.push_back(wofm.dsp);
        d.dsp_noao.push_back(woao.dsp);
        d.acc_fair.push_back(fair.acc);
        d.acc_nogp.push_back(vanilla.acc);
    }
    return d;
}

CriterionResult criterion_directional(const DirectionalData& d) {
    CriterionResult r;
    r.id = 9;
    r.name = "Directional fairness (partitioning lowers dSP)";
    std::size_t wins = 0;
    for (std::size_t i = 0; i < d.dsp_fair.size(); ++i) wins += d.dsp_fair[i] < d.dsp_nogp[i];
    const double med_fair = median(d.dsp_fair), med_nogp = median(d.dsp_nogp);
    const double acc_drop = median(d.acc_nogp) - median(d.acc_fair);
    const std::size_t need = d.dsp_fair.size() * 3 / 4;
    const bool ok = med_fair < med_nogp && wins >= need && acc_drop <= 0.03 &&
                    d.seconds_crit9 < 600.0;
    r.passed = ok;
    char buf[240];
    std::snprintf(buf, sizeof buf,
                  "median dSP %.4f vs %.4f (no partition), wins %zu/%zu, median ACC drop %.2fpp, "
                  "%.0fs",
                  med_fair, med_nogp, wins, d.dsp_fair.size(), acc_drop * 100.0, d.seconds_crit9);
    r.detail = buf;
    return r;
}

CriterionResult criterion_ablation(const DirectionalData& d) {
    CriterionResult r;
    r.id = 10;
    r.name = "Ablation ordering";
    const std::size_t n = d.dsp_fair.size();
    std::size_t w_fm = 0, w_gp = 0, w_ao = 0;
    for (std::size_t i = 0; i < n; ++i) {
        w_fm += d.dsp_fair[i] <= d.dsp_nofm[i];
        w_gp += d.dsp_fair[i] <= d.dsp_nogp[i];
        w_ao += d.dsp_fair[i] <= d.dsp_noao[i];
    }
    const std::size_t need = (n * 12 + 19) / 20;  // >= 12/20 scaled
    const bool med_ok = median(d.dsp_fair) <= median(d.dsp_nofm) &&
                        median(d.dsp_fair) <= median(d.dsp_nogp) &&
                        median(d.dsp_fair) <= median(d.dsp_noao);
    r.passed = med_ok && w_fm >= need && w_gp >= need && w_ao >= need;
    char buf[240];
    std::snprintf(buf, sizeof buf,
                  "medians dSP full=%.4f noFM=%.4f noGP=%.4f noAO=%.4f; wins %zu/%zu %zu/%zu %zu/%zu",
                  median(std::vector<double>(d.dsp_fair)),
                  median(std::vector<double>(d.dsp_nofm)),
                  median(std::vector<double>(d.dsp_nogp)),
                  median(std::vector<double>(d.dsp_noao)), w_fm, n, w_gp, n, w_ao, n);
    r.detail = buf;
    return r;
}

CriterionResult criterion_complexity(bool quick) {
    CriterionResult r;
    r.id = 11;
    r.name = "Complexity scaling";
    const std::size_t n = quick ? 1024 : 4096;
    const std::vector<std::size_t> cs = {4, 8, 16, 32};
    const TimingResult t = run_timing(n, 16, cs, 7);
    bool pairs_ok = true;
    for (std::size_t i = 0; i < cs.size(); ++i) {
        const std::uint64_t expect = static_cast<std::uint64_t>(n / cs[i]) * (n / cs[i]) * cs[i];
        if (t.rows[i].pairs_total != expect) pairs_ok = false;
        if (i > 0 && t.rows[i - 1].pairs_max_cluster != 4 * t.rows[i].pairs_max_cluster)
            pairs_ok = false;
    }
    const bool beta_ok = t.beta_critical >= 1.5 && t.beta_critical <= 2.5;
    r.passed = pairs_ok && beta_ok;
    char buf[240];
    std::snprintf(buf, sizeof buf,
                  "pair counts exact=%s; beta: critical-path %.2f, per-cluster flops %.2f, "
                  "sequential-total %.2f",
                  pairs_ok ? "yes" : "NO", t.beta_critical, t.beta_flops, t.beta_total);
    r.detail = buf;
    return r;
}

CriterionResult criterion_determinism(const std::string& scratch) {
    CriterionResult r;
    r.id = 12;
    r.name = "Determinism";
    namespace fs = std::filesystem;
    const fs::path dir = scratch.empty() ? fs::temp_directory_path() / "fairgp_verify"
                                         : fs::path(scratch);
    fs::create_directories(dir);

    RunConfig rc;
    SyntheticConfig sc = benchmark_config();
    sc.n = 300;
    rc.synthetic = sc;
    rc.train = benchmark_train_config();
    rc.train.epochs = 5;
    rc.partition.clusters = 4;
    rc.repeat = 2;
    bool same = true;
    std::string what;
    for (int round = 0; round < 2; ++round) {
        rc.out_dir = dir / ("round" + std::to_string(round));
        rc.name = "determinism_probe";
        run_experiment(rc);
        SweepConfig swc;
        swc.instances = 5;
        swc.seed = 11;
        const SweepResult sw = sweep_bounds(swc);
        nlohmann::json j = nlohmann::json::array();
        for (const auto& rep : sw.reports)
            j.push_back({{"bound", rep.bound},
                         {"lhs", rep.lhs},
                         {"rhs", rep.rhs},
                         {"margin", rep.margin},
                         {"satisfied", rep.satisfied}});
        save_report(j, rc.out_dir / "bounds_probe.json");
    }
    for (const char* f : {"determinism_probe.json", "bounds_probe.json"}) {
        const std::string a = read_file_bytes(dir / "round0" / f);
        const std::string b = read_file_bytes(dir / "round1" / f);
        if (a.empty() || a != b) {
            same = false;
            what = f;
            break;
        }
    }
    r.passed = same;
    r.detail = same ? "rerun report files byte-identical"
                    : ("file " + what + " differs between reruns");
    return r;
}

}  // namespace

bool all_passed(const std::vector<CriterionResult>& results) {
    return std::all_of(results.begin(), results.end(),
                       [](const CriterionResult& r) { return r.passed; });
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts) {
    std::vector<CriterionResult> out;
    auto emit = [&](CriterionResult r) {
        std::printf("[%s] criterion %2d: %s — %s\n", r.passed ? "PASS" : "FAIL", r.id,
                    r.name.c_str(), r.detail.c_str());
        std::fflush(stdout);
        out.push_back(std::move(r));
    };

    emit(criterion_theorem1_lemma1(1, false));
    emit(criterion_theorem1_lemma1(2, true));
    emit(criterion_theorem2());
    emit(criterion_gradcheck());
    emit(criterion_metric_oracle());
    emit(criterion_partition_validity());
    emit(criterion_partition_quality());
    emit(criterion_eigen_oracle());

    TrainConfig base = benchmark_train_config();
    std::size_t seeds = 20;
    if (opts.quick) {
        seeds = 4;
        base.epochs = 10;
    }
    const DirectionalData d = run_directional(seeds, base);
    emit(criterion_directional(d));
    emit(criterion_ablation(d));

    emit(criterion_complexity(opts.quick));
    emit(criterion_determinism(opts.scratch_dir));
    return out;
}

}  // namespace fairgp::verify
