#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "fairgp/attention.hpp"
#include "fairgp/rng.hpp"

using namespace fairgp;

namespace {

AttentionParams zero_params(std::size_t d_in, std::size_t d_out, std::size_t heads = 1) {
    AttentionParams p;
    p.w_q = DenseMatrix(d_in, d_out);
    p.w_k = DenseMatrix(d_in, d_out);
    p.w_v = DenseMatrix(d_in, d_out);
    p.heads = heads;
    return p;
}

AttentionParams random_params(Rng& rng, std::size_t d_in, std::size_t d_out,
                              std::size_t heads = 1) {
    AttentionParams p = zero_params(d_in, d_out, heads);
    for (double& v : p.w_q.data()) v = rng.normal();
    for (double& v : p.w_k.data()) v = rng.normal();
    for (double& v : p.w_v.data()) v = rng.normal();
    return p;
}

Partition make_partition(std::vector<int> assign) {
    Partition p;
    p.c = *std::max_element(assign.begin(), assign.end()) + 1;
    p.sizes.assign(p.c, 0);
    for (int a : assign) ++p.sizes[a];
    p.assignment = std::move(assign);
    return p;
}

DenseMatrix random_matrix(Rng& rng, std::size_t r, std::size_t c) {
    DenseMatrix m(r, c);
    for (double& v : m.data()) v = rng.normal();
    return m;
}

}  // namespace

TEST_CASE("zero weights give uniform attention") {
    Rng rng(1);
    const DenseMatrix x = random_matrix(rng, 4, 3);  // contents irrelevant with W=0
    const AttentionScores s = attention_scores(x, zero_params(3, 2), 1.0);
    for (std::size_t u = 0; u < 4; ++u)
        for (std::size_t v = 0; v < 4; ++v) CHECK(s.matrix(u, v) == doctest::Approx(0.25));
}

TEST_CASE("single node attends to itself") {
    DenseMatrix x(1, 2);
    x(0, 0) = 3.0;
    const AttentionScores s = attention_scores(x, zero_params(2, 2), 1.0);
    CHECK(s.matrix(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("scalar softmax example") {
    DenseMatrix x(2, 1);
    x(0, 0) = 1.0;
    x(1, 0) = 0.0;
    AttentionParams p = zero_params(1, 1);
    p.w_q(0, 0) = 1.0;
    p.w_k(0, 0) = 1.0;
    const AttentionScores s = attention_scores(x, p, 1.0);
    CHECK(s.matrix(0, 0) == doctest::Approx(0.7311).epsilon(1e-3));
    CHECK(s.matrix(0, 1) == doctest::Approx(0.2689).epsilon(1e-3));
}

TEST_CASE("row stochastic within 1e-9") {
    Rng rng(2);
    const DenseMatrix x = random_matrix(rng, 12, 4);
    const AttentionParams p = random_params(rng, 4, 4);
    const AttentionScores full = attention_scores(x, p, 2.0);
    const Partition part = make_partition({0, 1, 2, 0, 1, 2, 0, 1, 2, 0, 1, 2});
    const AttentionScores masked = masked_attention_scores(x, p, part, 2.0);
    for (std::size_t u = 0; u < 12; ++u) {
        double sf = 0.0, sm = 0.0;
        for (std::size_t v = 0; v < 12; ++v) {
            sf += full.matrix(u, v);
            sm += masked.matrix(u, v);
        }
        CHECK(std::fabs(sf - 1.0) < 1e-9);
        CHECK(std::fabs(sm - 1.0) < 1e-9);
    }
}

TEST_CASE("mask zeros are exact") {
    Rng rng(3);
    const DenseMatrix x = random_matrix(rng, 10, 3);
    const AttentionParams p = random_params(rng, 3, 3);
    const Partition part = make_partition({0, 0, 1, 1, 1, 0, 2, 2, 2, 0});
    const AttentionScores s = masked_attention_scores(x, p, part, 1.0);
    for (std::size_t u = 0; u < 10; ++u)
        for (std::size_t v = 0; v < 10; ++v)
            if (part.assignment[u] != part.assignment[v]) CHECK(s.matrix(u, v) == 0.0);
}

TEST_CASE("singleton clusters give the identity") {
    Rng rng(4);
    const DenseMatrix x = random_matrix(rng, 5, 2);
    const AttentionParams p = random_params(rng, 2, 2);
    const Partition part = make_partition({0, 1, 2, 3, 4});
    const AttentionScores s = masked_attention_scores(x, p, part, 1.0);
    for (std::size_t u = 0; u < 5; ++u)
        for (std::size_t v = 0; v < 5; ++v) CHECK(s.matrix(u, v) == (u == v ? 1.0 : 0.0));
}

TEST_CASE("single cluster equals unmasked") {
    Rng rng(5);
    const DenseMatrix x = random_matrix(rng, 6, 3);
    const AttentionParams p = random_params(rng, 3, 3);
    const Partition part = make_partition({0, 0, 0, 0, 0, 0});
    const AttentionScores masked = masked_attention_scores(x, p, part, 1.5);
    const AttentionScores full = attention_scores(x, p, 1.5);
    CHECK(max_abs_diff(masked.matrix, full.matrix) < 1e-12);
}

TEST_CASE("blockwise uniform with zero weights") {
    const DenseMatrix x = DenseMatrix(4, 2);
    const Partition part = make_partition({0, 0, 1, 1});
    const AttentionScores s = masked_attention_scores(x, zero_params(2, 2), part, 1.0);
    for (std::size_t u = 0; u < 4; ++u)
        for (std::size_t v = 0; v < 4; ++v)
            CHECK(s.matrix(u, v) ==
                  doctest::Approx(part.assignment[u] == part.assignment[v] ? 0.5 : 0.0));
}

TEST_CASE("approx scores: single cluster copies the full matrix") {
    Rng rng(6);
    const DenseMatrix x = random_matrix(rng, 6, 3);
    const AttentionParams p = random_params(rng, 3, 3);
    const AttentionScores full = attention_scores(x, p, 1.0);
    const Partition part = make_partition({0, 0, 0, 0, 0, 0});
    const DenseMatrix approx = approx_partitioned_scores(full, part, x, p, 1.0);
    CHECK(max_abs_diff(approx, full.matrix) == 0.0);
}

TEST_CASE("approx scores: uniform case") {
    const DenseMatrix x(4, 2);
    const AttentionParams p = zero_params(2, 2);
    const AttentionScores full = attention_scores(x, p, 1.0);
    const Partition part = make_partition({0, 0, 1, 1});
    const DenseMatrix approx = approx_partitioned_scores(full, part, x, p, 1.0);
    // alpha_pq = 1/2 for every pair, inter entries (1/2)/2 = 0.25 = intra
    for (std::size_t u = 0; u < 4; ++u)
        for (std::size_t v = 0; v < 4; ++v) CHECK(approx(u, v) == doctest::Approx(0.25));
}

TEST_CASE("approx scores: singleton clusters, zero weights → all 1/n") {
    const DenseMatrix x(4, 2);
    const AttentionParams p = zero_params(2, 2);
    const AttentionScores full = attention_scores(x, p, 1.0);
    const Partition part = make_partition({0, 1, 2, 3});
    const DenseMatrix approx = approx_partitioned_scores(full, part, x, p, 1.0);
    for (std::size_t u = 0; u < 4; ++u)
        for (std::size_t v = 0; v < 4; ++v) CHECK(approx(u, v) == doctest::Approx(0.25));
}

TEST_CASE("approx scores keep intra entries exactly and reject imbalance") {
    Rng rng(7);
    const DenseMatrix x = random_matrix(rng, 8, 3);
    const AttentionParams p = random_params(rng, 3, 3);
    const AttentionScores full = attention_scores(x, p, 1.0);
    const Partition part = make_partition({0, 1, 0, 1, 0, 1, 0, 1});
    const DenseMatrix approx = approx_partitioned_scores(full, part, x, p, 1.0);
    for (std::size_t u = 0; u < 8; ++u)
        for (std::size_t v = 0; v < 8; ++v)
            if (part.assignment[u] == part.assignment[v])
                CHECK(approx(u, v) == full.matrix(u, v));
    const Partition bad = make_partition({0, 0, 0, 0, 0, 1, 1, 1});
    CHECK_THROWS_AS(approx_partitioned_scores(full, bad, x, p, 1.0), std::invalid_argument);
}

TEST_CASE("forward output shape and the uniform-average oracle") {
    Rng rng(8);
    const std::size_t n = 5, d = 3, h = 4;
    const DenseMatrix x = random_matrix(rng, n, d);
    AttentionParams p = zero_params(d, h);
    for (double& v : p.w_v.data()) v = rng.normal();
    // zero MLP: the residual path makes the layer output exactly A·V
    FFNParams ffn;
    ffn.w1 = DenseMatrix(h, h);
    ffn.b1.assign(h, 0.0);
    ffn.w2 = DenseMatrix(h, h);
    ffn.b2.assign(h, 0.0);
    const DenseMatrix out = forward(x, p, ffn, nullptr, 1.0);
    REQUIRE(out.rows() == n);
    REQUIRE(out.cols() == h);
    const DenseMatrix v = matmul(x, p.w_v);
    for (std::size_t j = 0; j < h; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += v(i, j);
        mean /= static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) CHECK(out(i, j) == doctest::Approx(mean));
    }
}

TEST_CASE("forward with masking averages within the attending set") {
    Rng rng(9);
    const std::size_t n = 6, d = 2, h = 2;
    const DenseMatrix x = random_matrix(rng, n, d);
    AttentionParams p = zero_params(d, h);
    for (double& v : p.w_v.data()) v = rng.normal();
    FFNParams ffn;
    ffn.w1 = DenseMatrix(h, h);
    ffn.b1.assign(h, 0.0);
    ffn.w2 = DenseMatrix(h, h);
    ffn.b2.assign(h, 0.0);
    const Partition part = make_partition({0, 0, 0, 1, 1, 1});
    const DenseMatrix out = forward(x, p, ffn, &part, 1.0);
    const DenseMatrix v = matmul(x, p.w_v);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < h; ++j) {
            double mean = 0.0;
            for (std::size_t w = 0; w < n; ++w)
                if (part.assignment[w] == part.assignment[i]) mean += v(w, j);
            mean /= 3.0;
            CHECK(out(i, j) == doctest::Approx(mean));
        }
    }
}

TEST_CASE("permutation equivariance of forward") {
    Rng rng(10);
    const std::size_t n = 7, d = 3, h = 3;
    const DenseMatrix x = random_matrix(rng, n, d);
    const AttentionParams p = random_params(rng, d, h);
    FFNParams ffn;
    ffn.w1 = random_matrix(rng, h, h);
    ffn.b1 = {0.1, -0.2, 0.3};
    ffn.w2 = random_matrix(rng, h, h);
    ffn.b2 = {0.0, 0.5, -0.5};
    const Partition part = make_partition({0, 1, 0, 1, 0, 1, 0});
    const DenseMatrix base = forward(x, p, ffn, &part, 1.3);

    std::vector<std::size_t> perm = {3, 0, 6, 2, 5, 1, 4};
    DenseMatrix xp(n, d);
    std::vector<int> assign_p(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) xp(perm[i], j) = x(i, j);
        assign_p[perm[i]] = part.assignment[i];
    }
    const Partition part_p = make_partition(assign_p);
    const DenseMatrix out_p = forward(xp, p, ffn, &part_p, 1.3);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < h; ++j)
            CHECK(out_p(perm[i], j) == doctest::Approx(base(i, j)).epsilon(1e-12));
}

TEST_CASE("multi-head forward splits heads") {
    Rng rng(11);
    const std::size_t n = 4, d = 3, h = 4;
    const DenseMatrix x = random_matrix(rng, n, d);
    const AttentionParams p2 = random_params(rng, d, h, 2);
    FFNParams ffn;
    ffn.w1 = DenseMatrix(h, h);
    ffn.b1.assign(h, 0.0);
    ffn.w2 = DenseMatrix(h, h);
    ffn.b2.assign(h, 0.0);
    LayerCache cache;
    const DenseMatrix out = forward(x, p2, ffn, nullptr, 1.0, nullptr, &cache);
    REQUIRE(cache.head_scores.size() == 2);
    // per-head rows are stochastic
    for (const auto& s : cache.head_scores)
        for (std::size_t u = 0; u < n; ++u) {
            double sum = 0.0;
            for (std::size_t v = 0; v < n; ++v) sum += s(u, v);
            CHECK(std::fabs(sum - 1.0) < 1e-9);
        }
    CHECK(out.rows() == n);
}

TEST_CASE("block-restricted products agree with dense ones") {
    Rng rng(12);
    const std::size_t n = 9, d = 4;
    const Partition part = make_partition({0, 1, 2, 0, 1, 2, 0, 1, 2});
    const DenseMatrix x = random_matrix(rng, n, 3);
    const AttentionParams p = random_params(rng, 3, d);
    const AttentionScores s = masked_attention_scores(x, p, part, 1.0);
    const DenseMatrix v = random_matrix(rng, n, d);
    CHECK(max_abs_diff(detail::block_av(s.matrix, v, part), matmul(s.matrix, v)) < 1e-13);
    CHECK(max_abs_diff(detail::block_atv(s.matrix, v, part), matmul_transa(s.matrix, v)) < 1e-13);
    const DenseMatrix dz = random_matrix(rng, n, d);
    const DenseMatrix dense_outer = matmul_transb(dz, v);
    const DenseMatrix block_outer = detail::block_outer(dz, v, part);
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t w = 0; w < n; ++w)
            if (part.assignment[u] == part.assignment[w])
                CHECK(block_outer(u, w) == doctest::Approx(dense_outer(u, w)).epsilon(1e-12));
            else
                CHECK(block_outer(u, w) == 0.0);
}

TEST_CASE("attention input validation") {
    Rng rng(13);
    const DenseMatrix x = random_matrix(rng, 3, 2);
    CHECK_THROWS_AS(attention_scores(x, zero_params(3, 2), 1.0), std::invalid_argument);
    CHECK_THROWS_AS(attention_scores(x, zero_params(2, 2), 0.0), std::invalid_argument);
    DenseMatrix bad = x;
    bad(0, 0) = HUGE_VAL;
    CHECK_THROWS_AS(attention_scores(bad, zero_params(2, 2), 1.0), std::invalid_argument);
    AttentionParams mismatched = zero_params(2, 4, 3);  // heads must divide dims
    CHECK_THROWS_AS(attention_scores(x, mismatched, 1.0), std::invalid_argument);
}
