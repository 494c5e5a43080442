#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace fairgp {

/// Row-major dense matrix of doubles. The common currency of the attention
/// and spectral code paths.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static DenseMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
    static DenseMatrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double* row(std::size_t r) { return data_.data() + r * cols_; }
    const double* row(std::size_t r) const { return data_.data() + r * cols_; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool all_finite() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// a (m×k) · b (k×n). Throws std::invalid_argument on shape mismatch.
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
/// a (m×k) · bᵀ with b (n×k).
DenseMatrix matmul_transb(const DenseMatrix& a, const DenseMatrix& b);
/// aᵀ · b with a (k×m), b (k×n).
DenseMatrix matmul_transa(const DenseMatrix& a, const DenseMatrix& b);

DenseMatrix transpose(const DenseMatrix& a);

/// y = a·x for a (m×k), x length k.
std::vector<double> matvec(const DenseMatrix& a, const std::vector<double>& x);

/// Column slice [begin, end) as a new matrix.
DenseMatrix columns(const DenseMatrix& a, std::size_t begin, std::size_t end);

/// Frobenius-norm distance, used by tests.
double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b);

}  // namespace fairgp
