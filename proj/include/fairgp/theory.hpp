#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fairgp/attention.hpp"
#include "fairgp/dense_matrix.hpp"
#include "fairgp/graph.hpp"
#include "fairgp/partition.hpp"

namespace fairgp {

constexpr double kBoundTolerance = 1e-9;

/// One bound evaluation. For the two upper bounds margin = rhs - lhs; for the
/// lower bound margin = lhs - rhs. satisfied ⟺ margin >= -1e-9.
struct BoundReport {
    std::string bound;  // "theorem1" | "lemma1" | "theorem2"
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0;
    bool satisfied = false;
    std::string instance;  // free-form descriptor
    /// theorem2 only: the per-ordered-cluster-pair terms of the rhs, and the
    /// provable first-step bound |D^2 - D'^2| / (2 sqrt n) for audit.
    std::vector<double> pair_terms;
    std::optional<double> rhs_exact;
    /// lemma1 on the approximate matrix: worst |row sum - 1| when the input
    /// is not row-stochastic (reported, not gated).
    std::optional<double> row_sum_deviation;
};

/// lhs = ||s - A_hat s||_2, rhs = sum of attention entries across differently
/// labeled pairs. Requires a row-stochastic matrix. The rhs is computed two
/// ways internally (double loop vs group-mask bilinear form) and the routes
/// must agree to 1e-12.
BoundReport check_theorem1(const DenseMatrix& a_hat, const std::vector<int>& sensitive);

/// lhs as above, rhs = sqrt(n).
BoundReport check_lemma1(const DenseMatrix& a_hat, const std::vector<int>& sensitive);

/// Like check_lemma1 but for matrices that may not be row-stochastic (the
/// Eq. 10 approximation); records the row-sum deviation instead of rejecting.
BoundReport check_lemma1_unnormalized(const DenseMatrix& a_approx,
                                      const std::vector<int>& sensitive);

/// lhs = | ||s - A s|| - ||s - A' s|| | with A the full scores and A' the
/// balanced-partition approximation; rhs is the proof's final displayed line
/// aggregated over ordered cluster pairs. Requires exact balance.
BoundReport check_theorem2(const Graph& g, const DenseMatrix& x, const AttentionParams& params,
                           const Partition& partition, double scale);

struct SweepConfig {
    std::size_t instances = 100;
    std::size_t n_min = 8;
    std::size_t n_max = 64;
    std::vector<std::size_t> cluster_counts = {2, 4};
    double edge_prob = 0.2;
    std::uint64_t seed = 0;
};

struct SweepResult {
    std::vector<BoundReport> reports;
    std::size_t violations = 0;
    /// serialized generator state of the first violating instance, if any
    std::optional<std::string> first_violation;
};

/// Random-instance batch check of all three bounds. Any violation is counted
/// and the offending instance descriptor captured for reproduction.
SweepResult sweep_bounds(const SweepConfig& cfg);

}  // namespace fairgp
