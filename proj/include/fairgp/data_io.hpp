#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fairgp/graph.hpp"

#include <json.hpp>

namespace fairgp {

/// Stochastic-block-model generator configuration. Hubs get boosted edge
/// probability and a sensitive-feature skew opposite to the global one, so
/// the all-nodes and higher-order proportion tables disagree by construction.
struct SyntheticConfig {
    std::size_t n = 2000;
    std::size_t blocks = 16;
    double intra_p = 0.02;
    double inter_p = 0.008;
    std::vector<double> sensitive_skew = {};  // per-block P(s=1); empty → heterogeneous default
    double hub_fraction = 0.08;
    double hub_degree_boost = 10.0;
    double label_bias = 0.45;  // P(y=1|s=1) - P(y=1|s=0)
    double label_signal = 0.4; // feature-column separation between classes
    std::size_t noise_features = 3;
    std::uint64_t seed = 0;
};

/// Builds the SBM graph with hubs, sensitive skews and biased labels.
/// Deterministic per seed. Throws on infeasible configs (probabilities
/// outside [0,1] after the hub boost, hub_fraction >= 1).
Graph generate_synthetic(const SyntheticConfig& cfg);

/// Reads `u v` pairs (one per line, '#' comments) plus a feature CSV
/// (`id, f1..fd, sensitive, label` with a header). External ids are remapped
/// densely in feature-row order; labels are binarized. When mapping_out is
/// non-empty the id mapping is persisted there, one `external internal` pair
/// per line. Malformed rows are reported with their line number.
Graph load_graph(const std::filesystem::path& edge_path,
                 const std::filesystem::path& feature_path,
                 const std::filesystem::path& mapping_out = {});

/// Serializes a report as JSON with sorted keys and reals rounded to 6
/// significant digits; reruns with the same payload are byte-identical.
/// Missing metrics serialize as null.
void save_report(const nlohmann::json& report, const std::filesystem::path& path);

nlohmann::json load_report(const std::filesystem::path& path);

/// Rounds every number in the tree to 6 significant digits (what save_report
/// applies before writing).
nlohmann::json round_reals(const nlohmann::json& value);

}  // namespace fairgp
