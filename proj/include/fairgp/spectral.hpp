#pragma once

#include <vector>

#include "fairgp/dense_matrix.hpp"
#include "fairgp/graph.hpp"

namespace fairgp {

/// Top eigenpairs of the adjacency matrix, values in descending algebraic
/// order, eigenvector columns unit-norm with the first nonzero component
/// positive.
struct EigenResult {
    std::vector<double> values;
    DenseMatrix vectors;  // n×t, column k pairs with values[k]
};

struct SpectralConfig {
    std::size_t t = 3;
    double tol = 1e-10;
    std::size_t max_iter = 20000;
};

/// Computes the t algebraically-largest eigenpairs of the adjacency matrix by
/// shift-and-deflate power iteration (the shift makes magnitude order equal
/// algebraic order). Deterministic: the start vectors come from a fixed
/// internal seed. Throws on t > n or non-convergence (message carries the
/// achieved residual).
EigenResult top_eigenpairs(const Graph& g, std::size_t t, double tol = 1e-10,
                           std::size_t max_iter = 20000);

/// H' = H || S (feature concatenation). Eigenvector columns are standardized
/// to zero mean / unit variance before the concat so they are commensurate
/// with raw features; zero-variance columns become zero. The first d columns
/// of the result are the untouched input features.
DenseMatrix fuse_features(const Graph& g, const EigenResult& eig);

}  // namespace fairgp
