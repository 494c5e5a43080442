#include "fairgp/dense_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fairgp/parallel.hpp"

namespace fairgp {

DenseMatrix DenseMatrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows.begin()->size();
    DenseMatrix m(r, c);
    std::size_t i = 0;
    for (const auto& row : rows) {
        if (row.size() != c) throw std::invalid_argument("from_rows: ragged rows");
        std::copy(row.begin(), row.end(), m.row(i));
        ++i;
    }
    return m;
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

bool DenseMatrix::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

namespace {
constexpr std::size_t kParallelWork = 1u << 20;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("matmul: inner dimension mismatch");
    DenseMatrix out(a.rows(), b.cols());
    const std::size_t k = a.cols(), n = b.cols();
    auto body = [&](std::size_t r0, std::size_t r1) {
        for (std::size_t i = r0; i < r1; ++i) {
            double* oi = out.row(i);
            const double* ai = a.row(i);
            for (std::size_t p = 0; p < k; ++p) {
                const double av = ai[p];
                const double* bp = b.row(p);
                for (std::size_t j = 0; j < n; ++j) oi[j] += av * bp[j];
            }
        }
    };
    if (a.rows() * k * n >= kParallelWork) {
        parallel_for_rows(a.rows(), body);
    } else {
        body(0, a.rows());
    }
    return out;
}

DenseMatrix matmul_transb(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.cols()) throw std::invalid_argument("matmul_transb: inner dimension mismatch");
    DenseMatrix out(a.rows(), b.rows());
    const std::size_t k = a.cols(), n = b.rows();
    auto body = [&](std::size_t r0, std::size_t r1) {
        for (std::size_t i = r0; i < r1; ++i) {
            const double* ai = a.row(i);
            double* oi = out.row(i);
            for (std::size_t j = 0; j < n; ++j) {
                const double* bj = b.row(j);
                double acc = 0.0;
                for (std::size_t p = 0; p < k; ++p) acc += ai[p] * bj[p];
                oi[j] = acc;
            }
        }
    };
    if (a.rows() * k * n >= kParallelWork) {
        parallel_for_rows(a.rows(), body);
    } else {
        body(0, a.rows());
    }
    return out;
}

DenseMatrix matmul_transa(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows() != b.rows()) throw std::invalid_argument("matmul_transa: inner dimension mismatch");
    DenseMatrix out(a.cols(), b.cols());
    const std::size_t k = a.rows(), n = b.cols();
    for (std::size_t p = 0; p < k; ++p) {
        const double* ap = a.row(p);
        const double* bp = b.row(p);
        for (std::size_t i = 0; i < a.cols(); ++i) {
            double* oi = out.row(i);
            const double av = ap[i];
            for (std::size_t j = 0; j < n; ++j) oi[j] += av * bp[j];
        }
    }
    return out;
}

DenseMatrix transpose(const DenseMatrix& a) {
    DenseMatrix out(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
    return out;
}

std::vector<double> matvec(const DenseMatrix& a, const std::vector<double>& x) {
    if (a.cols() != x.size()) throw std::invalid_argument("matvec: dimension mismatch");
    std::vector<double> y(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* ai = a.row(i);
        double acc = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) acc += ai[j] * x[j];
        y[i] = acc;
    }
    return y;
}

DenseMatrix columns(const DenseMatrix& a, std::size_t begin, std::size_t end) {
    if (begin > end || end > a.cols()) throw std::invalid_argument("columns: bad range");
    DenseMatrix out(a.rows(), end - begin);
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = begin; j < end; ++j) out(i, j - begin) = a(i, j);
    return out;
}

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("max_abs_diff: shape mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i)
        m = std::max(m, std::fabs(a.data()[i] - b.data()[i]));
    return m;
}

}  // namespace fairgp
