#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fairgp/data_io.hpp"
#include "fairgp/graph.hpp"
#include "fairgp/metrics.hpp"
#include "fairgp/trainer.hpp"

namespace fairgp {

/// One experiment: data source + pipeline configs + repeat count.
struct RunConfig {
    std::optional<SyntheticConfig> synthetic;  // set unless loading from disk
    std::filesystem::path edge_path, feature_path;
    TrainConfig train;
    PartitionConfig partition;
    SpectralConfig spectral;
    std::size_t repeat = 1;
    std::filesystem::path out_dir;
    std::string name = "run";
};

struct AggregateMetric {
    double mean = 0.0;
    double stddev = 0.0;  // population std; 0 when repeat == 1
    std::size_t count = 0;
};

struct ExperimentResult {
    std::vector<MetricsReport> per_seed;
    AggregateMetric acc, auc_m, dsp, deo;
    nlohmann::json report;
};

Graph load_run_graph(const RunConfig& cfg, std::uint64_t seed);

/// Trains `repeat` seeds (seed, seed+1, ...), evaluates on the test mask,
/// aggregates mean±std and writes <name>.json into out_dir when set.
ExperimentResult run_experiment(const RunConfig& cfg);

/// Per-strategy fairness table over the same seeds and splits; strategies may
/// include "none" for the unpartitioned baseline.
nlohmann::json run_strategy_comparison(const RunConfig& cfg,
                                       const std::vector<std::string>& strategies);

struct TimingRow {
    std::size_t clusters = 0;
    std::uint64_t pairs_total = 0;  // attended pairs = sum of squared cluster sizes
    std::uint64_t pairs_max_cluster = 0;
    double seconds_total = 0.0;     // sequential sweep over clusters
    double seconds_critical = 0.0;  // max single-cluster time (c-way parallel wall-clock)
};

struct TimingResult {
    std::vector<TimingRow> rows;
    double beta_flops = 0.0;     // fitted exponent of pairs_max_cluster ~ c^-beta
    double beta_critical = 0.0;  // fitted exponent of seconds_critical ~ c^-beta
    double beta_total = 0.0;     // fitted exponent of seconds_total ~ c^-beta
    nlohmann::json report;       // deterministic part only (pair counts + beta_flops)
};

/// Times one masked attention layer per cluster count on a random input of
/// size n×d. Wall-clock numbers go to the result (and stdout), not into the
/// deterministic report file.
TimingResult run_timing(std::size_t n, std::size_t d, const std::vector<std::size_t>& cluster_counts,
                        std::uint64_t seed);

/// Least-squares slope of log(y) against log(c); returns the negated slope
/// (the beta in y ∝ c^-beta).
double fit_scaling_exponent(const std::vector<std::size_t>& cs, const std::vector<double>& ys);

nlohmann::json metrics_to_json(const MetricsReport& m);

}  // namespace fairgp
