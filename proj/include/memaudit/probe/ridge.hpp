#pragma once

#include "memaudit/probe/matrix.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace memaudit::probe {

struct RidgeOptions {
    double lambda = 0.01;
    /// Scale each column to unit variance within the training rows before
    /// fitting. Weights are reported in the original units either way.
    bool standardize = false;
};

struct RidgeFit {
    double intercept = 0.0;
    std::vector<double> weights;

    double predict(std::span<const double> x) const;
};

/// Minimizes ||y - b - X w||^2 + lambda ||w||^2 with b unpenalized, by
/// centering and solving the d x d system (d <= n) or the n x n dual (d > n)
/// with Cholesky. Throws NumericError when the system is singular, e.g.
/// lambda = 0 with rank-deficient X.
RidgeFit ridge_fit(const Matrix& X, std::span<const double> y, const RidgeOptions& opts);
RidgeFit ridge_fit(const Matrix& X, std::span<const double> y, double lambda);

/// Fit on rows [begin, end) only.
RidgeFit ridge_fit_rows(const Matrix& X, std::span<const double> y, std::size_t begin, std::size_t end,
                        const RidgeOptions& opts);

}  // namespace memaudit::probe
