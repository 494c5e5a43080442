#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "fairgp/data_io.hpp"
#include "fairgp/rng.hpp"
#include "fairgp/trainer.hpp"

using namespace fairgp;

namespace {

Graph labeled_graph(const std::vector<std::pair<NodeId, NodeId>>& edges, DenseMatrix feats,
                    std::vector<int> labels) {
    const std::size_t n = feats.rows();
    return build_graph(edges, std::move(feats), std::vector<int>(n, 0), std::move(labels));
}

}  // namespace

TEST_CASE("cross_entropy fixtures") {
    DenseMatrix saturated(1, 2);
    saturated(0, 0) = 20.0;
    saturated(0, 1) = -20.0;
    CHECK(cross_entropy(saturated, {0}) < 1e-8);

    DenseMatrix uniform(1, 2);
    CHECK(cross_entropy(uniform, {1}) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

    Rng rng(1);
    for (int trial = 0; trial < 20; ++trial) {
        DenseMatrix logits(4, 2);
        for (double& v : logits.data()) v = rng.normal() * 5;
        const double loss = cross_entropy(logits, {0, 1, 0, 1});
        CHECK(loss >= 0.0);
    }
    CHECK_THROWS_AS(cross_entropy(DenseMatrix(0, 2), {}), std::invalid_argument);
}

TEST_CASE("binarize_labels") {
    CHECK(binarize_labels({0, 1, 2, 3}) == std::vector<int>{0, 1, 1, 1});
    CHECK(binarize_labels({0, 0}) == std::vector<int>{0, 0});
    CHECK(binarize_labels({1}) == std::vector<int>{1});
    CHECK_THROWS_AS(binarize_labels({-1}), std::invalid_argument);
}

TEST_CASE("make_splits stratified counts") {
    // 16 nodes, classes 8/8 → val 2+2, test 2+2, train 4+4
    std::vector<int> labels(16);
    for (std::size_t i = 8; i < 16; ++i) labels[i] = 1;
    Graph g = labeled_graph({}, DenseMatrix(16, 1), labels);
    const SplitMasks m = make_splits(g, 3);
    std::size_t val = 0, test = 0, train = 0;
    for (std::size_t i = 0; i < 16; ++i) {
        val += m.val[i];
        test += m.test[i];
        train += m.train[i];
        CHECK(int(m.val[i]) + int(m.test[i]) + int(m.train[i]) <= 1);
    }
    CHECK(val == 4);
    CHECK(test == 4);
    CHECK(train == 8);
}

TEST_CASE("make_splits train cap at 1000 per class") {
    std::vector<int> labels(8000);
    for (std::size_t i = 4000; i < 8000; ++i) labels[i] = 1;
    Graph g = labeled_graph({}, DenseMatrix(8000, 1), labels);
    const SplitMasks m = make_splits(g, 0);
    std::size_t val = 0, test = 0, train = 0;
    for (std::size_t i = 0; i < 8000; ++i) {
        val += m.val[i];
        test += m.test[i];
        train += m.train[i];
    }
    CHECK(val == 2000);
    CHECK(test == 2000);
    CHECK(train == 2000);  // capped at 1000 per class
}

TEST_CASE("make_splits rejects tiny classes") {
    std::vector<int> labels = {0, 0, 0, 1, 1, 1, 1, 0};  // class sizes 4 and 4: fine
    Graph ok = labeled_graph({}, DenseMatrix(8, 1), labels);
    CHECK_NOTHROW(make_splits(ok, 0));
    std::vector<int> bad = {0, 0, 0, 1, 1, 1, 1, 1};  // class 0 has 3 nodes
    Graph notok = labeled_graph({}, DenseMatrix(8, 1), bad);
    CHECK_THROWS_AS(make_splits(notok, 0), std::invalid_argument);
}

namespace {

Graph separable_pair() {
    DenseMatrix feats(8, 2);
    std::vector<int> labels(8);
    for (std::size_t i = 0; i < 8; ++i) {
        labels[i] = i < 4 ? 0 : 1;
        feats(i, 0) = labels[i] == 0 ? -1.0 : 1.0;
        feats(i, 1) = 0.1 * static_cast<double>(i);
    }
    Graph g = labeled_graph({{0, 1}, {2, 3}, {4, 5}, {6, 7}}, std::move(feats), labels);
    SplitMasks m{std::vector<bool>(8, true), std::vector<bool>(8, false),
                 std::vector<bool>(8, false)};
    g.set_masks(std::move(m));
    return g;
}

}  // namespace

TEST_CASE("training a separable toy reaches perfect train accuracy") {
    Graph g = separable_pair();
    TrainConfig tc;
    tc.epochs = 200;
    tc.hidden = 4;
    tc.seed = 1;
    tc.ablations.no_fm = true;
    tc.ablations.no_gp = true;
    PartitionConfig pc;
    SpectralConfig sc;
    auto [params, trace] = train(g, tc, pc, sc);
    CHECK(trace.train_loss.back() < 0.1);
    const Predictions pred = predict(g, params, tc, pc, sc);
    for (std::size_t i = 0; i < 8; ++i) CHECK(pred.labels[i] == g.labels()[i]);
}

TEST_CASE("training is bit-deterministic per seed") {
    Graph g = separable_pair();
    TrainConfig tc;
    tc.epochs = 30;
    tc.hidden = 4;
    tc.seed = 9;
    tc.ablations.no_fm = true;
    PartitionConfig pc;
    pc.clusters = 2;
    SpectralConfig sc;
    auto [p1, t1] = train(g, tc, pc, sc);
    auto [p2, t2] = train(g, tc, pc, sc);
    CHECK(t1.train_loss.back() == t2.train_loss.back());
    CHECK(p1.classifier_w.data() == p2.classifier_w.data());
}

TEST_CASE("all eight ablation combinations run") {
    SyntheticConfig scfg;
    scfg.n = 120;
    scfg.blocks = 4;
    scfg.seed = 5;
    Graph g = generate_synthetic(scfg);
    g.set_masks(make_splits(g, 5));
    for (int bits = 0; bits < 8; ++bits) {
        TrainConfig tc;
        tc.epochs = 3;
        tc.hidden = 8;
        tc.seed = 2;
        tc.ablations.no_fm = bits & 1;
        tc.ablations.no_gp = bits & 2;
        tc.ablations.no_ao = bits & 4;
        PartitionConfig pc;
        pc.clusters = 4;
        SpectralConfig sc;
        sc.t = 2;
        CHECK_NOTHROW(train(g, tc, pc, sc));
    }
}

TEST_CASE("plain SGD on the linear model is monotone (convex case)") {
    Graph g = separable_pair();
    TrainConfig tc;
    tc.epochs = 60;
    tc.lr = 0.05;
    tc.optimizer = Optimizer::kSgd;
    tc.num_layers = 0;  // classifier on raw features: convex logistic loss
    tc.ablations.no_fm = true;
    tc.ablations.no_gp = true;
    tc.seed = 3;
    PartitionConfig pc;
    SpectralConfig sc;
    auto [params, trace] = train(g, tc, pc, sc);
    for (std::size_t e = 1; e < trace.train_loss.size(); ++e)
        CHECK(trace.train_loss[e] <= trace.train_loss[e - 1] + 1e-12);
}

TEST_CASE("predict outputs probabilities and breaks ties toward class zero") {
    Graph g = separable_pair();
    ModelParams params;  // no layers
    params.classifier_w = DenseMatrix(2, 2);  // zero weights → equal logits
    params.classifier_b.assign(2, 0.0);
    TrainConfig tc;
    tc.ablations.no_fm = true;
    tc.ablations.no_gp = true;
    PartitionConfig pc;
    SpectralConfig sc;
    const Predictions pred = predict(g, params, tc, pc, sc);
    for (std::size_t i = 0; i < 8; ++i) {
        CHECK(pred.prob_class1[i] == doctest::Approx(0.5));
        CHECK(pred.labels[i] == 0);
    }
}

TEST_CASE("gradients match central finite differences (spot check)") {
    Rng rng(21);
    for (int trial = 0; trial < 3; ++trial) {
        const std::size_t n = 5, d = 3, hidden = 4;
        DenseMatrix x(n, d);
        for (double& v : x.data()) v = rng.normal();
        std::vector<int> labels = {0, 1, 0, 1, 1};
        std::vector<bool> mask(n, true);
        TrainConfig tc;
        tc.hidden = hidden;
        tc.seed = rng.next_u64();

        ModelParams params;
        {
            Rng wr(tc.seed);
            auto mk = [&](std::size_t fi, std::size_t fo) {
                DenseMatrix w(fi, fo);
                for (double& v : w.data()) v = wr.uniform(-0.5, 0.5);
                return w;
            };
            ModelParams::Layer layer;
            layer.attn.w_q = mk(d, hidden);
            layer.attn.w_k = mk(d, hidden);
            layer.attn.w_v = mk(d, hidden);
            layer.ffn.w1 = mk(hidden, hidden);
            layer.ffn.b1.assign(hidden, 0.0);
            layer.ffn.w2 = mk(hidden, hidden);
            layer.ffn.b2.assign(hidden, 0.0);
            params.layers.push_back(std::move(layer));
            params.classifier_w = mk(hidden, 2);
            params.classifier_b.assign(2, 0.0);
        }
        ModelParams grads = zero_like(params);
        const double scale = 2.0;
        loss_and_gradients(x, labels, mask, params, nullptr, scale, &grads);
        auto pa = parameter_arrays(params);
        auto ga = parameter_arrays(grads);
        const double h = 1e-5;
        double worst = 0.0;
        for (std::size_t a = 0; a < pa.size(); ++a) {
            for (std::size_t i = 0; i < pa[a]->size(); i += 3) {  // subsample entries
                const double orig = (*pa[a])[i];
                (*pa[a])[i] = orig + h;
                const double lp = loss_and_gradients(x, labels, mask, params, nullptr, scale, nullptr);
                (*pa[a])[i] = orig - h;
                const double lm = loss_and_gradients(x, labels, mask, params, nullptr, scale, nullptr);
                (*pa[a])[i] = orig;
                const double fd = (lp - lm) / (2 * h);
                const double an = (*ga[a])[i];
                worst = std::max(worst,
                                 std::fabs(fd - an) / std::max({1e-8, std::fabs(fd), std::fabs(an)}));
            }
        }
        CHECK(worst <= 1e-4);
    }
}

TEST_CASE("train validates inputs") {
    Graph g = separable_pair();
    TrainConfig tc;
    tc.epochs = 0;
    CHECK_THROWS_AS(train(g, tc, PartitionConfig{}, SpectralConfig{}), std::invalid_argument);
    tc.epochs = 1;
    tc.lr = -1;
    CHECK_THROWS_AS(train(g, tc, PartitionConfig{}, SpectralConfig{}), std::invalid_argument);
}
