#include "memaudit/probe/ridge.hpp"

#include "memaudit/error.hpp"

#include <cmath>
#include <string>

namespace memaudit::probe {

double RidgeFit::predict(std::span<const double> x) const {
    if (x.size() != weights.size()) throw PreconditionError("ridge predict: feature count mismatch");
    double s = intercept;
    for (std::size_t j = 0; j < x.size(); ++j) s += weights[j] * x[j];
    return s;
}

RidgeFit ridge_fit(const Matrix& X, std::span<const double> y, const RidgeOptions& opts) {
    return ridge_fit_rows(X, y, 0, X.rows(), opts);
}

RidgeFit ridge_fit(const Matrix& X, std::span<const double> y, double lambda) {
    return ridge_fit(X, y, RidgeOptions{lambda, false});
}

RidgeFit ridge_fit_rows(const Matrix& X, std::span<const double> y, std::size_t begin, std::size_t end,
                        const RidgeOptions& opts) {
    if (X.rows() != y.size()) throw PreconditionError("ridge_fit: X and y differ in length");
    if (begin >= end || end > X.rows()) throw PreconditionError("ridge_fit: empty or out-of-range row range");
    if (!(opts.lambda >= 0.0) || !std::isfinite(opts.lambda)) {
        throw PreconditionError("ridge_fit: lambda must be finite and >= 0");
    }
    const std::size_t m = end - begin;
    const std::size_t d = X.cols();

    std::vector<double> xmean(d, 0.0), scale(d, 1.0);
    double ymean = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
        if (!std::isfinite(y[i])) throw PreconditionError("ridge_fit: non-finite target");
        ymean += y[i];
        auto row = X.row(i);
        for (std::size_t j = 0; j < d; ++j) {
            if (!std::isfinite(row[j])) throw PreconditionError("ridge_fit: non-finite feature");
            xmean[j] += row[j];
        }
    }
    ymean /= static_cast<double>(m);
    for (auto& v : xmean) v /= static_cast<double>(m);

    // Centered (and optionally scaled) design, m x d.
    std::vector<double> xc(m * d);
    std::vector<double> yc(m);
    for (std::size_t i = 0; i < m; ++i) {
        auto row = X.row(begin + i);
        for (std::size_t j = 0; j < d; ++j) xc[i * d + j] = row[j] - xmean[j];
        yc[i] = y[begin + i] - ymean;
    }
    if (opts.standardize) {
        for (std::size_t j = 0; j < d; ++j) {
            double ss = 0.0;
            for (std::size_t i = 0; i < m; ++i) ss += xc[i * d + j] * xc[i * d + j];
            const double sd = std::sqrt(ss / static_cast<double>(m));
            scale[j] = sd > 0.0 ? sd : 0.0;
            const double inv = sd > 0.0 ? 1.0 / sd : 0.0;
            for (std::size_t i = 0; i < m; ++i) xc[i * d + j] *= inv;
        }
    }

    std::vector<double> w(d, 0.0);
    if (d > 0) {
        if (d <= m) {
            std::vector<double> a(d * d, 0.0), b(d, 0.0);
            for (std::size_t i = 0; i < m; ++i) {
                const double* r = &xc[i * d];
                for (std::size_t p = 0; p < d; ++p) {
                    b[p] += r[p] * yc[i];
                    for (std::size_t q = 0; q <= p; ++q) a[p * d + q] += r[p] * r[q];
                }
            }
            for (std::size_t p = 0; p < d; ++p) {
                for (std::size_t q = 0; q < p; ++q) a[q * d + p] = a[p * d + q];
                a[p * d + p] += opts.lambda;
            }
            w = cholesky_solve(std::move(a), std::move(b), d);
        } else {
            // w = Xc^T (Xc Xc^T + lambda I)^{-1} yc
            std::vector<double> k(m * m, 0.0);
            for (std::size_t p = 0; p < m; ++p) {
                for (std::size_t q = 0; q <= p; ++q) {
                    double s = 0.0;
                    for (std::size_t j = 0; j < d; ++j) s += xc[p * d + j] * xc[q * d + j];
                    k[p * m + q] = s;
                    k[q * m + p] = s;
                }
                k[p * m + p] += opts.lambda;
            }
            auto alpha = cholesky_solve(std::move(k), yc, m);
            for (std::size_t i = 0; i < m; ++i) {
                for (std::size_t j = 0; j < d; ++j) w[j] += xc[i * d + j] * alpha[i];
            }
        }
    }

    RidgeFit fit;
    fit.weights.resize(d);
    fit.intercept = ymean;
    for (std::size_t j = 0; j < d; ++j) {
        double wj = w[j];
        if (opts.standardize) wj = scale[j] > 0.0 ? wj / scale[j] : 0.0;
        fit.weights[j] = wj;
        fit.intercept -= wj * xmean[j];
    }
    return fit;
}

}  // namespace memaudit::probe
