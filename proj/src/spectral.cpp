#include "fairgp/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "fairgp/rng.hpp"

namespace fairgp {

namespace {

// adjacency matvec: y = A x
void adj_matvec(const Graph& g, const double* x, double* y) {
    const std::size_t n = g.node_count();
    for (NodeId u = 0; u < n; ++u) {
        double acc = 0.0;
        for (NodeId v : g.neighbors(u)) acc += x[v];
        y[u] = acc;
    }
}

double norm(const std::vector<double>& x) {
    double acc = 0.0;
    for (double v : x) acc += v * v;
    return std::sqrt(acc);
}

// Cyclic Jacobi eigensolver for the small b×b Rayleigh-Ritz matrix.
// Returns eigenvalues in `d` and accumulated rotations in `z` (columns are
// eigenvectors), unsorted.
void small_symmetric_eig(DenseMatrix a, std::vector<double>& d, DenseMatrix& z) {
    const std::size_t b = a.rows();
    z = DenseMatrix::identity(b);
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < b; ++p)
            for (std::size_t q = p + 1; q < b; ++q) off += a(p, q) * a(p, q);
        if (off < 1e-28) break;
        for (std::size_t p = 0; p < b; ++p) {
            for (std::size_t q = p + 1; q < b; ++q) {
                if (std::fabs(a(p, q)) < 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < b; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < b; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < b; ++k) {
                    const double zkp = z(k, p), zkq = z(k, q);
                    z(k, p) = c * zkp - s * zkq;
                    z(k, q) = s * zkp + c * zkq;
                }
            }
        }
    }
    d.resize(b);
    for (std::size_t i = 0; i < b; ++i) d[i] = a(i, i);
}

// Modified Gram-Schmidt, in place on the columns of v. Re-randomizes columns
// that collapse to zero (rank deficiency in the start block).
void orthonormalize(DenseMatrix& v, Rng& rng) {
    const std::size_t n = v.rows(), b = v.cols();
    for (std::size_t j = 0; j < b; ++j) {
        for (int attempt = 0; attempt < 8; ++attempt) {
            for (std::size_t i = 0; i < j; ++i) {
                double c = 0.0;
                for (std::size_t r = 0; r < n; ++r) c += v(r, i) * v(r, j);
                for (std::size_t r = 0; r < n; ++r) v(r, j) -= c * v(r, i);
            }
            double nrm = 0.0;
            for (std::size_t r = 0; r < n; ++r) nrm += v(r, j) * v(r, j);
            nrm = std::sqrt(nrm);
            if (nrm > 1e-12) {
                for (std::size_t r = 0; r < n; ++r) v(r, j) /= nrm;
                break;
            }
            for (std::size_t r = 0; r < n; ++r) v(r, j) = rng.uniform(-1.0, 1.0);
        }
    }
}

void fix_sign_column(DenseMatrix& m, std::size_t col) {
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const double x = m(i, col);
        if (std::fabs(x) > 1e-12) {
            if (x < 0)
                for (std::size_t r = 0; r < m.rows(); ++r) m(r, col) = -m(r, col);
            return;
        }
    }
}

}  // namespace

EigenResult top_eigenpairs(const Graph& g, std::size_t t, double tol, std::size_t max_iter) {
    const std::size_t n = g.node_count();
    if (t < 1 || t > n) throw std::invalid_argument("top_eigenpairs: need 1 <= t <= n");
    if (!(tol > 0)) throw std::invalid_argument("top_eigenpairs: tol must be positive");

    Rng rng(0x5eedf00dULL);

    // Estimate the spectral radius with a short unshifted power run; the
    // Gershgorin degree bound is far too loose on skewed-degree graphs and
    // would flatten the shifted gap ratios.
    double radius = 1.0;
    {
        std::vector<double> x(n), ax(n);
        for (double& xi : x) xi = rng.uniform(-1.0, 1.0);
        double nrm = norm(x);
        for (double& xi : x) xi /= nrm;
        for (int it = 0; it < 40; ++it) {
            adj_matvec(g, x.data(), ax.data());
            nrm = norm(ax);
            if (nrm == 0.0) break;  // edgeless graph
            for (std::size_t i = 0; i < n; ++i) x[i] = ax[i] / nrm;
            radius = nrm;
        }
    }
    // spec(A) ⊂ [-radius, radius] up to estimation error; the slack keeps the
    // shifted operator positive definite
    const double shift = 1.10 * radius + 1.0;

    // Block subspace iteration with Rayleigh-Ritz; the buffer columns keep
    // convergence healthy when eigenvalues near position t cluster.
    const std::size_t block = std::min(n, t + 6);
    // several power applications between Ritz projections: convergence per
    // projection compounds while the QR/Ritz overhead stays fixed
    const std::size_t powers_per_round = 8;

    DenseMatrix v(n, block);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < block; ++j) v(i, j) = rng.uniform(-1.0, 1.0);
    orthonormalize(v, rng);

    DenseMatrix w(n, block);
    std::vector<double> ritz(block, 0.0);
    std::vector<double> col(n), acol(n);
    double worst_resid = HUGE_VAL;

    for (std::size_t it = 0; it < max_iter; ++it) {
        // w = (A + shift I)^k v, columns renormalized between applications
        for (std::size_t j = 0; j < block; ++j) {
            for (std::size_t i = 0; i < n; ++i) col[i] = v(i, j);
            for (std::size_t p = 0; p < powers_per_round; ++p) {
                adj_matvec(g, col.data(), acol.data());
                for (std::size_t i = 0; i < n; ++i) col[i] = acol[i] + shift * col[i];
                const double nrm = norm(col);
                if (nrm > 0)
                    for (double& ci : col) ci /= nrm;
            }
            for (std::size_t i = 0; i < n; ++i) w(i, j) = col[i];
        }
        orthonormalize(w, rng);
        // Rayleigh-Ritz on A restricted to span(w)
        DenseMatrix aw(n, block);
        for (std::size_t j = 0; j < block; ++j) {
            for (std::size_t i = 0; i < n; ++i) col[i] = w(i, j);
            adj_matvec(g, col.data(), acol.data());
            for (std::size_t i = 0; i < n; ++i) aw(i, j) = acol[i];
        }
        DenseMatrix h = matmul_transa(w, aw);  // block×block, symmetric up to roundoff
        for (std::size_t p = 0; p < block; ++p)
            for (std::size_t q = p + 1; q < block; ++q) {
                const double sym = 0.5 * (h(p, q) + h(q, p));
                h(p, q) = sym;
                h(q, p) = sym;
            }
        std::vector<double> d;
        DenseMatrix z;
        small_symmetric_eig(h, d, z);
        std::vector<std::size_t> order(block);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b2) { return d[a] > d[b2]; });
        // v = w · z, columns in descending Ritz order
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < block; ++j) {
                double acc = 0.0;
                for (std::size_t k = 0; k < block; ++k) acc += w(i, k) * z(k, order[j]);
                v(i, j) = acc;
            }
        for (std::size_t j = 0; j < block; ++j) ritz[j] = d[order[j]];

        // residual check on the t leading pairs
        worst_resid = 0.0;
        for (std::size_t j = 0; j < t; ++j) {
            for (std::size_t i = 0; i < n; ++i) col[i] = v(i, j);
            adj_matvec(g, col.data(), acol.data());
            double r2 = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double diff = acol[i] - ritz[j] * col[i];
                r2 += diff * diff;
            }
            worst_resid = std::max(worst_resid, std::sqrt(r2) / std::max(1.0, std::fabs(ritz[j])));
        }
        if (worst_resid <= tol) {
            EigenResult res;
            res.values.assign(ritz.begin(), ritz.begin() + t);
            res.vectors = DenseMatrix(n, t);
            for (std::size_t j = 0; j < t; ++j) {
                for (std::size_t i = 0; i < n; ++i) res.vectors(i, j) = v(i, j);
                fix_sign_column(res.vectors, j);
            }
            return res;
        }
    }
    throw std::runtime_error("top_eigenpairs: no convergence within " + std::to_string(max_iter) +
                             " iterations (worst relative residual " + std::to_string(worst_resid) +
                             ")");
}

DenseMatrix fuse_features(const Graph& g, const EigenResult& eig) {
    const std::size_t n = g.node_count();
    const std::size_t d = g.features().cols();
    const std::size_t t = eig.vectors.cols();
    if (t > 0 && eig.vectors.rows() != n)
        throw std::invalid_argument("fuse_features: eigenvector row count != node count");

    DenseMatrix fused(n, d + t);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) fused(i, j) = g.features()(i, j);

    // standardize each eigenvector column; raw unit-norm entries are O(1/sqrt(n))
    // and would vanish next to the feature columns
    for (std::size_t k = 0; k < t; ++k) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += eig.vectors(i, k);
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double c = eig.vectors(i, k) - mean;
            var += c * c;
        }
        const double sd = std::sqrt(var / static_cast<double>(n));
        const double inv = sd > 1e-12 ? 1.0 / sd : 0.0;
        for (std::size_t i = 0; i < n; ++i)
            fused(i, d + k) = (eig.vectors(i, k) - mean) * inv;
    }
    return fused;
}

}  // namespace fairgp
