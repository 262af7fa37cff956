#include "memaudit/error.hpp"
#include "memaudit/probe/schemes.hpp"

#include <string>

namespace memaudit::probe {

std::vector<Fold> fold_boundaries(std::size_t n, std::size_t folds) {
    if (folds < 2) throw PreconditionError("fold_boundaries: folds must be >= 2");
    if (n < folds) throw PreconditionError("fold_boundaries: fewer rows than folds");
    std::vector<Fold> out;
    const std::size_t base = n / folds, extra = n % folds;
    std::size_t begin = 0;
    for (std::size_t k = 0; k < folds; ++k) {
        const std::size_t size = base + (k < extra ? 1 : 0);
        out.push_back({begin, begin + size});
        begin += size;
    }
    return out;
}

namespace detail {

void check_rolling(const Matrix& X, std::span<const double> y, std::size_t window) {
    if (X.rows() != y.size()) throw PreconditionError("rolling_predict: X and y differ in length");
    if (window < 2) throw PreconditionError("rolling_predict: window must be >= 2");
    if (y.size() <= window) {
        throw PreconditionError("rolling_predict: need more than " + std::to_string(window) + " rows, got " +
                                std::to_string(y.size()));
    }
}

std::vector<ExpandingStep> expanding_steps(const Matrix& X, std::span<const double> y, std::size_t folds,
                                           std::size_t gap) {
    if (X.rows() != y.size()) throw PreconditionError("expanding_predict: X and y differ in length");
    if (folds < 2) throw PreconditionError("expanding_predict: folds must be >= 2");
    if (gap + 2 > folds) throw PreconditionError("expanding_predict: gap leaves no test fold");
    if (y.size() < 2 * folds) {
        throw PreconditionError("expanding_predict: need at least " + std::to_string(2 * folds) + " rows, got " +
                                std::to_string(y.size()));
    }
    auto bounds = fold_boundaries(y.size(), folds);
    std::vector<ExpandingStep> steps;
    for (std::size_t k = 1; k + gap < folds; ++k) steps.push_back({bounds[k + gap], bounds[k - 1].end});
    return steps;
}

}  // namespace detail

std::vector<Prediction> rolling_predict_serial(const Matrix& X, std::span<const double> y, std::size_t window,
                                               const RidgeOptions& opts) {
    detail::check_rolling(X, y, window);
    std::vector<Prediction> out;
    out.reserve(y.size() - window);
    for (std::size_t t = window; t < y.size(); ++t) {
        auto fit = ridge_fit_rows(X, y, t - window, t, opts);
        out.push_back({t, fit.predict(X.row(t)), t - window, t});
    }
    return out;
}

std::vector<Prediction> expanding_predict_serial(const Matrix& X, std::span<const double> y, std::size_t folds,
                                                 std::size_t gap, const RidgeOptions& opts) {
    std::vector<Prediction> out;
    for (const auto& step : detail::expanding_steps(X, y, folds, gap)) {
        auto fit = ridge_fit_rows(X, y, 0, step.train_end, opts);
        for (std::size_t t = step.test.begin; t < step.test.end; ++t) {
            out.push_back({t, fit.predict(X.row(t)), 0, step.train_end});
        }
    }
    return out;
}

std::vector<Prediction> sma_benchmark(std::span<const double> y, std::size_t window) {
    if (window < 1) throw PreconditionError("sma_benchmark: window must be >= 1");
    if (y.size() <= window) throw PreconditionError("sma_benchmark: need more rows than the window");
    std::vector<Prediction> out;
    for (std::size_t t = window; t < y.size(); ++t) {
        double s = 0.0;
        for (std::size_t i = t - window; i < t; ++i) s += y[i];
        out.push_back({t, s / static_cast<double>(window), t - window, t});
    }
    return out;
}

}  // namespace memaudit::probe
