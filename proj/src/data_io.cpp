#include "fairgp/data_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "fairgp/rng.hpp"
#include "fairgp/trainer.hpp"

namespace fairgp {

Graph generate_synthetic(const SyntheticConfig& cfg) {
    if (cfg.n < 2 || cfg.blocks < 1 || cfg.blocks > cfg.n)
        throw std::invalid_argument("generate_synthetic: need 1 <= blocks <= n, n >= 2");
    if (cfg.intra_p < 0 || cfg.intra_p > 1 || cfg.inter_p < 0 || cfg.inter_p > 1)
        throw std::invalid_argument("generate_synthetic: edge probabilities must be in [0,1]");
    if (cfg.hub_fraction < 0 || cfg.hub_fraction >= 1)
        throw std::invalid_argument("generate_synthetic: hub_fraction must be in [0,1)");
    if (cfg.hub_degree_boost < 1)
        throw std::invalid_argument("generate_synthetic: hub_degree_boost must be >= 1");
    if (cfg.intra_p * cfg.hub_degree_boost > 1.0 + 1e-12)
        throw std::invalid_argument(
            "generate_synthetic: infeasible config, boosted intra_p exceeds 1");
    if (std::fabs(cfg.label_bias) > 1.0)
        throw std::invalid_argument("generate_synthetic: |label_bias| must be <= 1");

    std::vector<double> skew = cfg.sensitive_skew;
    if (skew.empty()) {
        // heterogeneous default: a majority of blocks lean s=1, the rest lean
        // the other way, so the global mix is uneven
        skew.resize(cfg.blocks);
        const std::size_t high = (cfg.blocks * 5) / 8;
        for (std::size_t b = 0; b < cfg.blocks; ++b) skew[b] = b < high ? 0.8 : 0.45;
    }
    if (skew.size() != cfg.blocks)
        throw std::invalid_argument("generate_synthetic: skew list must have one entry per block");
    for (double p : skew)
        if (p < 0 || p > 1)
            throw std::invalid_argument("generate_synthetic: skew entries must be in [0,1]");

    const std::size_t n = cfg.n;
    Rng rng(cfg.seed);

    std::vector<int> block(n);
    for (std::size_t i = 0; i < n; ++i) block[i] = static_cast<int>(i * cfg.blocks / n);

    // hubs drawn uniformly; their sensitive skew opposes the global mean
    std::vector<bool> hub(n, false);
    {
        std::vector<NodeId> ids(n);
        for (std::size_t i = 0; i < n; ++i) ids[i] = static_cast<NodeId>(i);
        rng.shuffle(ids);
        const std::size_t n_hubs = static_cast<std::size_t>(cfg.hub_fraction * static_cast<double>(n));
        for (std::size_t i = 0; i < n_hubs; ++i) hub[ids[i]] = true;
    }
    double global_skew = 0.0;
    for (std::size_t b = 0; b < cfg.blocks; ++b) global_skew += skew[b];
    global_skew /= static_cast<double>(cfg.blocks);
    const double hub_skew = 1.0 - global_skew;

    std::vector<int> sensitive(n);
    for (std::size_t i = 0; i < n; ++i)
        sensitive[i] = rng.bernoulli(hub[i] ? hub_skew : skew[block[i]]) ? 1 : 0;

    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double p = sensitive[i] == 1 ? 0.5 + cfg.label_bias / 2 : 0.5 - cfg.label_bias / 2;
        labels[i] = rng.bernoulli(p) ? 1 : 0;
    }

    // features: a label-separating column, the (noisy) sensitive column, noise
    const std::size_t d = 2 + cfg.noise_features;
    DenseMatrix feats(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        feats(i, 0) = (labels[i] == 1 ? cfg.label_signal : -cfg.label_signal) + rng.normal();
        const int s_noisy = rng.bernoulli(0.1) ? 1 - sensitive[i] : sensitive[i];
        feats(i, 1) = s_noisy == 1 ? 1.0 : -1.0;
        for (std::size_t j = 2; j < d; ++j) feats(i, j) = rng.normal();
    }

    std::vector<std::pair<NodeId, NodeId>> edges;
    for (NodeId u = 0; u < n; ++u) {
        for (NodeId v = u + 1; v < n; ++v) {
            double p = block[u] == block[v] ? cfg.intra_p : cfg.inter_p;
            if (hub[u] || hub[v]) p = std::min(1.0, p * cfg.hub_degree_boost);
            if (rng.bernoulli(p)) edges.push_back({u, v});
        }
    }
    return build_graph(edges, std::move(feats), std::move(sensitive), std::move(labels));
}

namespace {

[[noreturn]] void malformed(const std::filesystem::path& path, std::size_t line_no,
                            const std::string& what) {
    throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " + what);
}

}  // namespace

Graph load_graph(const std::filesystem::path& edge_path,
                 const std::filesystem::path& feature_path,
                 const std::filesystem::path& mapping_out) {
    std::ifstream features(feature_path);
    if (!features) throw std::runtime_error("cannot open feature file " + feature_path.string());

    std::map<long long, NodeId> id_map;
    std::vector<long long> external_ids;
    std::vector<std::vector<double>> rows;
    std::vector<int> sensitive, labels;

    std::string line;
    std::size_t line_no = 0;
    bool header_skipped = false;
    std::size_t width = 0;
    while (std::getline(features, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        if (!header_skipped) {
            header_skipped = true;  // first non-comment line is the header
            continue;
        }
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() < 3)
            malformed(feature_path, line_no, "expected id, features, sensitive, label");
        if (width == 0)
            width = fields.size();
        else if (fields.size() != width)
            malformed(feature_path, line_no, "inconsistent column count");
        std::vector<double> parsed;
        for (const auto& f : fields) {
            try {
                std::size_t used = 0;
                const double v = std::stod(f, &used);
                while (used < f.size() && std::isspace(static_cast<unsigned char>(f[used]))) ++used;
                if (used != f.size()) throw std::invalid_argument("trailing junk");
                parsed.push_back(v);
            } catch (const std::exception&) {
                malformed(feature_path, line_no, "non-numeric field '" + f + "'");
            }
        }
        const long long ext = static_cast<long long>(parsed[0]);
        if (id_map.count(ext)) malformed(feature_path, line_no, "duplicate node id");
        id_map[ext] = static_cast<NodeId>(external_ids.size());
        external_ids.push_back(ext);
        rows.push_back({parsed.begin() + 1, parsed.end() - 2});
        sensitive.push_back(static_cast<int>(parsed[parsed.size() - 2]));
        labels.push_back(static_cast<int>(parsed[parsed.size() - 1]));
    }
    if (rows.empty()) throw std::runtime_error("feature file has no data rows");

    std::ifstream edges_in(edge_path);
    if (!edges_in) throw std::runtime_error("cannot open edge file " + edge_path.string());
    std::vector<std::pair<NodeId, NodeId>> edges;
    line_no = 0;
    while (std::getline(edges_in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::stringstream ss(line);
        long long u, v;
        if (!(ss >> u)) continue;  // blank line
        if (!(ss >> v)) malformed(edge_path, line_no, "expected two node ids");
        const auto iu = id_map.find(u);
        const auto iv = id_map.find(v);
        if (iu == id_map.end())
            malformed(edge_path, line_no, "node " + std::to_string(u) + " has no feature row");
        if (iv == id_map.end())
            malformed(edge_path, line_no, "node " + std::to_string(v) + " has no feature row");
        edges.push_back({iu->second, iv->second});
    }

    const std::size_t n = rows.size();
    const std::size_t d = rows[0].size();
    DenseMatrix feats(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) feats(i, j) = rows[i][j];

    Graph g = build_graph(edges, std::move(feats), std::move(sensitive), binarize_labels(labels));

    if (!mapping_out.empty()) {
        std::ofstream map_out(mapping_out);
        if (!map_out) throw std::runtime_error("cannot write mapping " + mapping_out.string());
        for (std::size_t i = 0; i < external_ids.size(); ++i)
            map_out << external_ids[i] << " " << i << "\n";
    }
    return g;
}

nlohmann::json round_reals(const nlohmann::json& value) {
    if (value.is_number_float()) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.6g", value.get<double>());
        return nlohmann::json(std::strtod(buf, nullptr));
    }
    if (value.is_object()) {
        nlohmann::json out = nlohmann::json::object();
        for (const auto& [k, v] : value.items()) out[k] = round_reals(v);
        return out;
    }
    if (value.is_array()) {
        nlohmann::json out = nlohmann::json::array();
        for (const auto& v : value) out.push_back(round_reals(v));
        return out;
    }
    return value;
}

void save_report(const nlohmann::json& report, const std::filesystem::path& path) {
    if (!path.parent_path().empty()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write report " + path.string());
    out << round_reals(report).dump(2) << "\n";
    if (!out) throw std::runtime_error("I/O failure writing " + path.string());
}

nlohmann::json load_report(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open report " + path.string());
    return nlohmann::json::parse(in);
}

}  // namespace fairgp
