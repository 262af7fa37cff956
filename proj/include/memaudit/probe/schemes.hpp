#pragma once

#include "memaudit/probe/matrix.hpp"
#include "memaudit/probe/ridge.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace memaudit::probe {

/// A prediction for row `index`, fitted on rows [train_begin, train_end).
struct Prediction {
    std::size_t index = 0;
    double value = 0.0;
    std::size_t train_begin = 0;
    std::size_t train_end = 0;

    bool operator==(const Prediction&) const = default;
};

/// Half-open row range of one fold.
struct Fold {
    std::size_t begin = 0;
    std::size_t end = 0;

    bool operator==(const Fold&) const = default;
};

/// `folds` contiguous folds in time order; the first n % folds folds hold one
/// extra row. Throws PreconditionError when folds < 2 or n < folds.
std::vector<Fold> fold_boundaries(std::size_t n, std::size_t folds);

/// For each t in [window, n): fit on rows [t - window, t) and predict row t.
/// Throws PreconditionError when window < 2 or n <= window. Window fits run
/// in parallel with OpenMP; the output is in index order.
std::vector<Prediction> rolling_predict(const Matrix& X, std::span<const double> y, std::size_t window,
                                        const RidgeOptions& opts);

/// Train on folds [0, k) and predict every row of fold k + gap, for
/// k = 1 .. folds - 1 - gap. Throws PreconditionError when folds < 2,
/// gap > folds - 2 or n < 2 * folds.
std::vector<Prediction> expanding_predict(const Matrix& X, std::span<const double> y, std::size_t folds,
                                          std::size_t gap, const RidgeOptions& opts);

/// Single-threaded references for the two schemes above; same results.
std::vector<Prediction> rolling_predict_serial(const Matrix& X, std::span<const double> y, std::size_t window,
                                               const RidgeOptions& opts);
std::vector<Prediction> expanding_predict_serial(const Matrix& X, std::span<const double> y, std::size_t folds,
                                                 std::size_t gap, const RidgeOptions& opts);

/// Mean of y over [t - window, t) for each t in [window, n).
std::vector<Prediction> sma_benchmark(std::span<const double> y, std::size_t window);

namespace detail {
void check_rolling(const Matrix& X, std::span<const double> y, std::size_t window);
/// (test fold, training end) pairs of the expanding scheme.
struct ExpandingStep {
    Fold test;
    std::size_t train_end = 0;
};
std::vector<ExpandingStep> expanding_steps(const Matrix& X, std::span<const double> y, std::size_t folds,
                                           std::size_t gap);
}  // namespace detail

}  // namespace memaudit::probe
