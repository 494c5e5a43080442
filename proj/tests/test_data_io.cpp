#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "fairgp/data_io.hpp"
#include "fairgp/metrics.hpp"
#include "fairgp/rng.hpp"

using namespace fairgp;
namespace fs = std::filesystem;

namespace {

fs::path scratch() {
    const fs::path dir = fs::temp_directory_path() / "fairgp_io_tests";
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p);
    out << content;
}

}  // namespace

TEST_CASE("load_graph parses the documented format") {
    const fs::path dir = scratch();
    write_file(dir / "p3_edges.txt", "# comment line\n0 1\n1 2\n");
    write_file(dir / "p3_features.csv",
               "id,f0,f1,sensitive,label\n0,0.5,1.0,0,0\n1,-1.5,0.25,1,1\n2,2.0,0.0,0,2\n");
    const Graph g = load_graph(dir / "p3_edges.txt", dir / "p3_features.csv");
    CHECK(g.node_count() == 3);
    CHECK(degree(g, 1) == 2);
    CHECK(g.features()(1, 0) == doctest::Approx(-1.5));
    CHECK(g.sensitive() == std::vector<int>{0, 1, 0});
    CHECK(g.labels() == std::vector<int>{0, 1, 1});  // label 2 binarized to 1
}

TEST_CASE("load_graph deduplicates repeated edge lines") {
    const fs::path dir = scratch();
    write_file(dir / "dup_edges.txt", "0 1\n0 1\n1 0\n");
    write_file(dir / "dup_features.csv", "id,f0,sensitive,label\n0,0.0,0,0\n1,1.0,1,1\n");
    const Graph g = load_graph(dir / "dup_edges.txt", dir / "dup_features.csv");
    CHECK(g.edge_count() == 1);
}

TEST_CASE("load_graph reports malformed rows with line numbers") {
    const fs::path dir = scratch();
    write_file(dir / "bad_features.csv", "id,f0,sensitive,label\n0,0.0,0,0\n1,oops,1,1\n");
    write_file(dir / "bad_edges.txt", "0 1\n");
    try {
        load_graph(dir / "bad_edges.txt", dir / "bad_features.csv");
        FAIL("expected an exception");
    } catch (const std::runtime_error& e) {
        const std::string msg = e.what();
        CHECK(msg.find(":3") != std::string::npos);  // header is line 1
        CHECK(msg.find("oops") != std::string::npos);
    }
}

TEST_CASE("load_graph rejects edges referencing unknown ids") {
    const fs::path dir = scratch();
    write_file(dir / "miss_edges.txt", "0 9\n");
    write_file(dir / "miss_features.csv", "id,f0,sensitive,label\n0,0.0,0,0\n1,1.0,1,1\n");
    CHECK_THROWS_WITH_AS(load_graph(dir / "miss_edges.txt", dir / "miss_features.csv"),
                         doctest::Contains("no feature row"), std::runtime_error);
}

TEST_CASE("load_graph remaps sparse external ids densely and persists the mapping") {
    const fs::path dir = scratch();
    write_file(dir / "sparse_edges.txt", "100 205\n");
    write_file(dir / "sparse_features.csv",
               "id,f0,sensitive,label\n100,1.0,0,0\n205,2.0,1,1\n");
    const fs::path map_path = dir / "sparse.idmap";
    const Graph g = load_graph(dir / "sparse_edges.txt", dir / "sparse_features.csv", map_path);
    CHECK(g.node_count() == 2);
    CHECK(degree(g, 0) == 1);
    std::ifstream map_in(map_path);
    long long ext;
    std::size_t internal;
    REQUIRE(bool(map_in >> ext >> internal));
    CHECK(ext == 100);
    CHECK(internal == 0);
}

TEST_CASE("synthetic generator is deterministic per seed") {
    SyntheticConfig cfg;
    cfg.n = 200;
    cfg.blocks = 4;
    cfg.seed = 12;
    const Graph a = generate_synthetic(cfg);
    const Graph b = generate_synthetic(cfg);
    CHECK(a.edge_count() == b.edge_count());
    CHECK(a.sensitive() == b.sensitive());
    CHECK(a.labels() == b.labels());
    for (NodeId u = 0; u < a.node_count(); ++u) {
        const auto na = a.neighbors(u);
        const auto nb = b.neighbors(u);
        REQUIRE(na.size() == nb.size());
        for (std::size_t i = 0; i < na.size(); ++i) CHECK(na[i] == nb[i]);
    }
}

TEST_CASE("unbiased limit gives a balanced table") {
    SyntheticConfig cfg;
    cfg.n = 2000;
    cfg.blocks = 4;
    cfg.sensitive_skew = {0.5, 0.5, 0.5, 0.5};
    cfg.label_bias = 0.0;
    cfg.hub_fraction = 0.0;
    cfg.hub_degree_boost = 1.0;
    cfg.intra_p = 0.01;
    cfg.inter_p = 0.005;
    cfg.seed = 1;
    const Graph g = generate_synthetic(cfg);
    const ProportionTable t = proportion_table(g, std::vector<int>(cfg.n, 0), 1000);
    const double hi = std::max(*t.all_nodes.ratio_s1, *t.all_nodes.ratio_s0);
    CHECK(hi < 1.15);
    // a fair random predictor is near parity
    Rng rng(2);
    std::vector<int> coin(cfg.n);
    for (auto& v : coin) v = rng.bernoulli(0.5);
    CHECK(*delta_sp(coin, g.sensitive()) < 0.08);
}

TEST_CASE("hub skew flips the higher-order table against the all-nodes table") {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        SyntheticConfig cfg;  // defaults: global majority s=1, hubs lean s=0
        cfg.seed = seed;
        const Graph g = generate_synthetic(cfg);
        const std::size_t threshold = default_higher_order_threshold(g);
        const ProportionTable t = proportion_table(g, std::vector<int>(cfg.n, 0), threshold);
        REQUIRE(t.all_nodes.ratio_s1.has_value());
        REQUIRE(t.higher_order.ratio_s1.has_value());
        const bool all_majority_s1 = *t.all_nodes.ratio_s1 > *t.all_nodes.ratio_s0;
        const bool ho_majority_s1 = *t.higher_order.ratio_s1 > *t.higher_order.ratio_s0;
        CHECK(all_majority_s1);
        CHECK(!ho_majority_s1);
    }
}

TEST_CASE("generator validates configuration") {
    SyntheticConfig cfg;
    cfg.intra_p = 0.3;
    cfg.hub_degree_boost = 10.0;  // boosted probability 3 > 1: infeasible
    CHECK_THROWS_AS(generate_synthetic(cfg), std::invalid_argument);
    SyntheticConfig cfg2;
    cfg2.hub_fraction = 1.0;
    CHECK_THROWS_AS(generate_synthetic(cfg2), std::invalid_argument);
}

TEST_CASE("report round trip and stable bytes") {
    const fs::path dir = scratch();
    nlohmann::json j{{"acc", 0.123456789}, {"missing", nullptr}, {"list", {1.0, 2.5}}};
    save_report(j, dir / "a.json");
    save_report(j, dir / "b.json");
    std::ifstream fa(dir / "a.json"), fb(dir / "b.json");
    const std::string sa((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
    const std::string sb((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
    CHECK(sa == sb);
    CHECK(sa.find("null") != std::string::npos);
    const nlohmann::json back = load_report(dir / "a.json");
    CHECK(back["acc"].get<double>() == doctest::Approx(0.123457).epsilon(1e-9));  // 6 digits
    CHECK(back["missing"].is_null());
}

TEST_CASE("generated graph round-trips through the disk format") {
    SyntheticConfig cfg;
    cfg.n = 60;
    cfg.blocks = 3;
    cfg.seed = 9;
    const Graph g = generate_synthetic(cfg);
    const fs::path dir = scratch();
    // write in the loader's documented format
    {
        std::ofstream e(dir / "rt_edges.txt");
        g.for_each_edge([&](NodeId u, NodeId v) { e << u << " " << v << "\n"; });
        std::ofstream f(dir / "rt_features.csv");
        f << "id";
        for (std::size_t j = 0; j < g.features().cols(); ++j) f << ",f" << j;
        f << ",sensitive,label\n";
        f.precision(17);
        for (std::size_t i = 0; i < g.node_count(); ++i) {
            f << i;
            for (std::size_t j = 0; j < g.features().cols(); ++j) f << "," << g.features()(i, j);
            f << "," << g.sensitive()[i] << "," << g.labels()[i] << "\n";
        }
    }
    const Graph back = load_graph(dir / "rt_edges.txt", dir / "rt_features.csv");
    REQUIRE(back.node_count() == g.node_count());
    CHECK(back.edge_count() == g.edge_count());
    CHECK(back.sensitive() == g.sensitive());
    CHECK(back.labels() == g.labels());
    for (NodeId u = 0; u < g.node_count(); ++u) {
        const auto na = g.neighbors(u);
        const auto nb = back.neighbors(u);
        REQUIRE(na.size() == nb.size());
        for (std::size_t i = 0; i < na.size(); ++i) CHECK(na[i] == nb[i]);
    }
    CHECK(max_abs_diff(back.features(), g.features()) == 0.0);
}

TEST_CASE("synthetic edge density tracks the configuration") {
    // mean density over seeds close to the configured probabilities
    SyntheticConfig cfg;
    cfg.n = 400;
    cfg.blocks = 4;
    cfg.intra_p = 0.05;
    cfg.inter_p = 0.01;
    cfg.hub_fraction = 0.0;
    cfg.hub_degree_boost = 1.0;
    double total_edges = 0.0;
    const int seeds = 8;
    for (int s = 0; s < seeds; ++s) {
        cfg.seed = s;
        total_edges += static_cast<double>(generate_synthetic(cfg).edge_count());
    }
    const double block_size = 100.0;
    const double intra_pairs = 4 * block_size * (block_size - 1) / 2;
    const double inter_pairs = 400.0 * 399.0 / 2 - intra_pairs;
    const double expected = intra_pairs * cfg.intra_p + inter_pairs * cfg.inter_p;
    const double sigma = std::sqrt(expected);  // binomial std, roughly
    CHECK(std::fabs(total_edges / seeds - expected) < 3 * sigma);
}
