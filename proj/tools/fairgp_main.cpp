#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fairgp/data_io.hpp"
#include "fairgp/harness.hpp"
#include "fairgp/theory.hpp"
#include "fairgp/trainer.hpp"
#include "fairgp/verify.hpp"

namespace {

using namespace fairgp;

struct CommonOpts {
    // dataset
    std::string edges, features;
    bool synthetic = false;
    SyntheticConfig synth;
    // pipeline
    TrainConfig train;
    PartitionConfig partition;
    SpectralConfig spectral;
    std::string partition_name = "multilevel";
    std::size_t repeat = 1;
    std::string out_dir = "reports";
    std::string name = "run";
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--edges", o.edges, "edge list file (u v per line, # comments)");
    cmd->add_option("--features", o.features, "feature CSV (id, f.., sensitive, label)");
    cmd->add_flag("--synthetic", o.synthetic, "use the synthetic biased generator");
    cmd->add_option("--n", o.synth.n, "synthetic: node count");
    cmd->add_option("--blocks", o.synth.blocks, "synthetic: block count");
    cmd->add_option("--intra-p", o.synth.intra_p, "synthetic: intra-block edge probability");
    cmd->add_option("--inter-p", o.synth.inter_p, "synthetic: inter-block edge probability");
    cmd->add_option("--skew", o.synth.sensitive_skew, "synthetic: per-block P(s=1)");
    cmd->add_option("--hub-fraction", o.synth.hub_fraction, "synthetic: hub fraction");
    cmd->add_option("--hub-boost", o.synth.hub_degree_boost, "synthetic: hub degree boost");
    cmd->add_option("--label-bias", o.synth.label_bias, "synthetic: P(y=1|s) shift");
    cmd->add_option("--label-signal", o.synth.label_signal, "synthetic: feature separation");

    cmd->add_option("--epochs", o.train.epochs, "training epochs");
    cmd->add_option("--lr", o.train.lr, "learning rate");
    cmd->add_option_function<std::string>(
           "--optimizer",
           [&o](const std::string& v) {
               if (v == "sgd")
                   o.train.optimizer = Optimizer::kSgd;
               else if (v == "adam")
                   o.train.optimizer = Optimizer::kAdam;
               else
                   throw CLI::ValidationError("--optimizer must be sgd or adam");
           },
           "optimizer: sgd|adam")
        ->default_str("adam");
    cmd->add_option("--hidden", o.train.hidden, "hidden width");
    cmd->add_option("--heads", o.train.heads, "attention heads");
    cmd->add_option("--layers", o.train.num_layers, "attention layers");
    cmd->add_flag("--scale-by-n", o.train.scale_by_n, "divide logits by sqrt(n) instead of sqrt(d_k)");
    cmd->add_flag("--no-fm", o.train.ablations.no_fm, "ablation: drop the structure matrix");
    cmd->add_flag("--no-gp", o.train.ablations.no_gp, "ablation: no graph partitioning");
    cmd->add_flag("--no-ao", o.train.ablations.no_ao, "ablation: attention left unmasked");
    cmd->add_option("--seed", o.train.seed, "base seed");

    cmd->add_option("--partition", o.partition_name, "partition strategy: multilevel|louvain|random");
    cmd->add_option("--clusters", o.partition.clusters, "cluster count (0 = auto)");
    cmd->add_option("--balance-eps", o.partition.balance_eps, "multilevel balance tolerance");

    cmd->add_option("--spectral-t", o.spectral.t, "structure-matrix eigenvector count");
    cmd->add_option("--spectral-tol", o.spectral.tol, "eigensolver residual tolerance");
    cmd->add_option("--spectral-max-iter", o.spectral.max_iter, "eigensolver iteration cap");

    cmd->add_option("--repeat", o.repeat, "seeds per experiment");
    cmd->add_option("--out", o.out_dir, "report directory");
    cmd->add_option("--name", o.name, "report name stem");
}

RunConfig to_run_config(const CommonOpts& o) {
    RunConfig rc;
    if (o.synthetic || (o.edges.empty() && o.features.empty())) {
        rc.synthetic = o.synth;
    } else {
        if (o.edges.empty() || o.features.empty())
            throw CLI::ValidationError("need both --edges and --features (or --synthetic)");
        rc.edge_path = o.edges;
        rc.feature_path = o.features;
    }
    rc.train = o.train;
    rc.partition = o.partition;
    if (o.partition_name == "multilevel")
        rc.partition.strategy = PartitionStrategy::kMultilevel;
    else if (o.partition_name == "louvain")
        rc.partition.strategy = PartitionStrategy::kLouvain;
    else if (o.partition_name == "random")
        rc.partition.strategy = PartitionStrategy::kRandom;
    else
        throw CLI::ValidationError("unknown --partition " + o.partition_name);
    rc.partition.seed = o.train.seed;
    rc.spectral = o.spectral;
    rc.repeat = o.repeat;
    rc.out_dir = o.out_dir;
    rc.name = o.name;
    return rc;
}

void print_aggregate(const char* label, const AggregateMetric& m) {
    if (m.count == 0)
        std::printf("  %-10s undefined\n", label);
    else
        std::printf("  %-10s %.4f ± %.4f (n=%zu)\n", label, m.mean, m.stddev, m.count);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"FairGP: fairness-aware graph transformer with partitioned attention"};
    app.require_subcommand(1);
    app.set_config("--config", "", "read options from a key=value config file");

    CommonOpts train_o, ablate_o, compare_o, bounds_o, generate_o;

    auto* cmd_train = app.add_subcommand("train", "train one configuration and report metrics");
    add_common(cmd_train, train_o);

    auto* cmd_ablate =
        app.add_subcommand("ablate", "run the 8 ablation-flag combinations, one report each");
    add_common(cmd_ablate, ablate_o);

    auto* cmd_compare = app.add_subcommand("compare-partitions",
                                           "fairness per partition strategy on shared seeds");
    add_common(cmd_compare, compare_o);
    std::vector<std::string> strategies = {"multilevel", "louvain", "random", "none"};
    cmd_compare->add_option("--strategies", strategies, "strategies to compare (incl. 'none')");

    auto* cmd_bounds = app.add_subcommand("check-bounds", "random-instance sweep of the three bounds");
    add_common(cmd_bounds, bounds_o);
    std::size_t bound_instances = 100;
    cmd_bounds->add_option("--instances", bound_instances, "number of random instances");

    auto* cmd_timing = app.add_subcommand("timing", "attention-layer cost per cluster count");
    std::size_t timing_n = 4096, timing_d = 16;
    std::vector<std::size_t> timing_cs = {4, 8, 16, 32};
    std::uint64_t timing_seed = 7;
    std::string timing_out = "reports";
    cmd_timing->add_option("--n", timing_n, "node count");
    cmd_timing->add_option("--d", timing_d, "feature width");
    cmd_timing->add_option("--clusters-list", timing_cs, "cluster counts");
    cmd_timing->add_option("--seed", timing_seed, "seed");
    cmd_timing->add_option("--out", timing_out, "report directory");

    auto* cmd_generate = app.add_subcommand("generate", "write a synthetic graph to disk");
    add_common(cmd_generate, generate_o);

    auto* cmd_verify = app.add_subcommand("verify", "run the acceptance property suites");
    bool verify_quick = false;
    std::string verify_scratch;
    cmd_verify->add_flag("--quick", verify_quick, "scaled-down smoke variant");
    cmd_verify->add_option("--scratch", verify_scratch, "scratch dir for determinism probes");

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_train->parsed()) {
            const RunConfig rc = to_run_config(train_o);
            const ExperimentResult res = run_experiment(rc);
            std::printf("%s (repeat=%zu)\n", rc.name.c_str(), rc.repeat);
            print_aggregate("ACC", res.acc);
            print_aggregate("AUC", res.auc_m);
            print_aggregate("dSP", res.dsp);
            print_aggregate("dEO", res.deo);
            std::printf("report: %s\n", (rc.out_dir / (rc.name + ".json")).string().c_str());
        } else if (cmd_ablate->parsed()) {
            for (int bits = 0; bits < 8; ++bits) {
                RunConfig rc = to_run_config(ablate_o);
                rc.train.ablations.no_fm = bits & 1;
                rc.train.ablations.no_gp = bits & 2;
                rc.train.ablations.no_ao = bits & 4;
                rc.name = ablate_o.name + "_fm" + std::to_string(1 - (bits & 1)) + "_gp" +
                          std::to_string(1 - ((bits >> 1) & 1)) + "_ao" +
                          std::to_string(1 - ((bits >> 2) & 1));
                const ExperimentResult res = run_experiment(rc);
                std::printf("%-24s dSP %.4f  dEO %.4f  ACC %.4f\n", rc.name.c_str(),
                            res.dsp.mean, res.deo.mean, res.acc.mean);
            }
        } else if (cmd_compare->parsed()) {
            const RunConfig rc = to_run_config(compare_o);
            const nlohmann::json table = run_strategy_comparison(rc, strategies);
            for (const auto& row : table["rows"]) {
                const auto fmt = [&](const char* key) {
                    return row[key].is_null() ? std::string("undef")
                                              : std::to_string(row[key]["mean"].get<double>());
                };
                std::printf("%-12s dSP %s  dEO %s  ACC %s\n",
                            row["strategy"].get<std::string>().c_str(), fmt("delta_sp").c_str(),
                            fmt("delta_eo").c_str(), fmt("acc").c_str());
            }
        } else if (cmd_bounds->parsed()) {
            SweepConfig sc;
            sc.instances = bound_instances;
            sc.seed = bounds_o.train.seed;
            const SweepResult sw = sweep_bounds(sc);
            nlohmann::json reports = nlohmann::json::array();
            for (const auto& rep : sw.reports) {
                nlohmann::json j{{"bound", rep.bound}, {"lhs", rep.lhs},       {"rhs", rep.rhs},
                                 {"margin", rep.margin}, {"satisfied", rep.satisfied},
                                 {"instance", rep.instance}};
                if (rep.rhs_exact) j["rhs_exact"] = *rep.rhs_exact;
                if (!rep.pair_terms.empty()) j["pair_terms"] = rep.pair_terms;
                reports.push_back(std::move(j));
            }
            nlohmann::json out{{"instances", sc.instances},
                               {"seed", sc.seed},
                               {"violations", sw.violations},
                               {"reports", reports}};
            if (sw.first_violation) out["first_violation"] = *sw.first_violation;
            const std::filesystem::path path =
                std::filesystem::path(bounds_o.out_dir) / (bounds_o.name + "_bounds.json");
            save_report(out, path);
            std::printf("%zu instances, %zu bound violations; report: %s\n", sc.instances,
                        sw.violations, path.string().c_str());
            if (sw.violations > 0) {
                std::printf("first: %s\n", sw.first_violation->c_str());
                return 2;
            }
        } else if (cmd_timing->parsed()) {
            const TimingResult t = run_timing(timing_n, timing_d, timing_cs, timing_seed);
            std::printf("%8s %14s %16s %12s %12s\n", "clusters", "pairs_total", "pairs_max",
                        "total_s", "critical_s");
            for (const auto& row : t.rows)
                std::printf("%8zu %14llu %16llu %12.4f %12.4f\n", row.clusters,
                            static_cast<unsigned long long>(row.pairs_total),
                            static_cast<unsigned long long>(row.pairs_max_cluster),
                            row.seconds_total, row.seconds_critical);
            std::printf("beta (per-cluster flops) %.3f | wall-clock: critical-path %.3f, "
                        "sequential-total %.3f\n",
                        t.beta_flops, t.beta_critical, t.beta_total);
            const std::filesystem::path path =
                std::filesystem::path(timing_out) / "timing.json";
            save_report(t.report, path);  // deterministic part only
            std::printf("report: %s\n", path.string().c_str());
        } else if (cmd_generate->parsed()) {
            SyntheticConfig sc = generate_o.synth;
            sc.seed = generate_o.train.seed;
            const Graph g = generate_synthetic(sc);
            std::filesystem::create_directories(generate_o.out_dir);
            const std::filesystem::path edges_p =
                std::filesystem::path(generate_o.out_dir) / (generate_o.name + "_edges.txt");
            const std::filesystem::path feats_p =
                std::filesystem::path(generate_o.out_dir) / (generate_o.name + "_features.csv");
            std::FILE* fe = std::fopen(edges_p.string().c_str(), "w");
            if (!fe) throw std::runtime_error("cannot write " + edges_p.string());
            g.for_each_edge([&](NodeId u, NodeId v) { std::fprintf(fe, "%u %u\n", u, v); });
            std::fclose(fe);
            std::FILE* ff = std::fopen(feats_p.string().c_str(), "w");
            if (!ff) throw std::runtime_error("cannot write " + feats_p.string());
            std::fprintf(ff, "id");
            for (std::size_t j = 0; j < g.features().cols(); ++j) std::fprintf(ff, ",f%zu", j);
            std::fprintf(ff, ",sensitive,label\n");
            for (std::size_t i = 0; i < g.node_count(); ++i) {
                std::fprintf(ff, "%zu", i);
                for (std::size_t j = 0; j < g.features().cols(); ++j)
                    std::fprintf(ff, ",%.17g", g.features()(i, j));
                std::fprintf(ff, ",%d,%d\n", g.sensitive()[i], g.labels()[i]);
            }
            std::fclose(ff);
            std::printf("wrote %s and %s (n=%zu, edges=%zu)\n", edges_p.string().c_str(),
                        feats_p.string().c_str(), g.node_count(), g.edge_count());
        } else if (cmd_verify->parsed()) {
            verify::AcceptanceOptions opts;
            opts.quick = verify_quick;
            opts.scratch_dir = verify_scratch;
            const auto results = verify::run_acceptance(opts);
            if (!verify::all_passed(results)) return 2;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
