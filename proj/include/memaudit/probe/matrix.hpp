#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace memaudit::probe {

/// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    /// Throws PreconditionError if `values.size() != rows * cols`.
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    const std::vector<double>& values() const { return data_; }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Solve A x = b in place for symmetric positive definite A (n x n,
/// row-major) by Cholesky. Throws NumericError when a pivot is not
/// positive relative to the largest diagonal entry.
std::vector<double> cholesky_solve(std::vector<double> a, std::vector<double> b, std::size_t n);

/// Each row scaled to unit Euclidean norm; zero rows are left as they are.
Matrix l2_normalize_rows(const Matrix& m);

}  // namespace memaudit::probe
