#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fairgp/dense_matrix.hpp"
#include "fairgp/graph.hpp"

namespace fairgp::verify {

/// Independent oracles used only by the verification suites; none of these
/// share code with the implementation paths they check.

/// Dense symmetric eigensolver by cyclic Jacobi rotations over the full
/// matrix. Returns all eigenpairs sorted by descending eigenvalue.
struct DenseEig {
    std::vector<double> values;
    DenseMatrix vectors;  // column k pairs with values[k]
};
DenseEig jacobi_eigensolver(DenseMatrix a);

/// Exhaustive minimum edge cut over all balanced 2-partitions (sizes n/2).
std::size_t brute_force_min_cut_2way(const Graph& g);

/// Direct-counting group positive rate difference (the metric oracle).
/// Returns -1 when a group is empty.
double brute_force_delta_sp(const std::vector<int>& pred, const std::vector<int>& sensitive);
double brute_force_delta_eo(const std::vector<int>& pred, const std::vector<int>& labels,
                            const std::vector<int>& sensitive);

/// Distance between the orthogonal projectors onto the two column spans.
double projector_distance(const DenseMatrix& a, const DenseMatrix& b);

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;
};

struct AcceptanceOptions {
    /// scale the expensive training criteria down for smoke runs
    bool quick = false;
    std::string scratch_dir = "";  // where determinism-check report files go
};

/// Runs the twelve acceptance criteria, printing one pass/fail line each.
/// Returns all results; overall success is the conjunction.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts);

bool all_passed(const std::vector<CriterionResult>& results);

}  // namespace fairgp::verify
