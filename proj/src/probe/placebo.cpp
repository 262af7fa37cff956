#include "memaudit/probe/placebo.hpp"

#include "memaudit/error.hpp"
#include "memaudit/random.hpp"

#include <cmath>
#include <numeric>

namespace memaudit::probe {

Placebos make_placebos(const Matrix& X, std::uint64_t seed) {
    if (X.rows() == 0 || X.cols() == 0) throw PreconditionError("make_placebos: empty matrix");
    Placebos p;
    p.permutation.resize(X.rows());
    std::iota(p.permutation.begin(), p.permutation.end(), std::size_t{0});
    std::mt19937_64 shuffle_rng(derive_seed(seed, {1}));
    for (std::size_t i = X.rows() - 1; i > 0; --i) {
        const auto j = static_cast<std::size_t>(uniform_index(shuffle_rng, i + 1));
        std::swap(p.permutation[i], p.permutation[j]);
    }
    p.shuffled = Matrix(X.rows(), X.cols());
    for (std::size_t i = 0; i < X.rows(); ++i) {
        auto src = X.row(p.permutation[i]);
        auto dst = p.shuffled.row(i);
        std::copy(src.begin(), src.end(), dst.begin());
    }

    std::mt19937_64 normal_rng(derive_seed(seed, {2}));
    NormalSampler normal;
    p.random = Matrix(X.rows(), X.cols());
    for (std::size_t i = 0; i < X.rows(); ++i) {
        for (double& v : p.random.row(i)) v = normal(normal_rng);
    }
    return p;
}

CosineReport cosine_report(const Matrix& A, const Matrix& B) {
    if (A.rows() != B.rows() || A.cols() != B.cols()) throw PreconditionError("cosine_report: shape mismatch");
    if (A.rows() == 0) throw PreconditionError("cosine_report: no rows");
    CosineReport r;
    for (std::size_t i = 0; i < A.rows(); ++i) {
        auto a = A.row(i);
        auto b = B.row(i);
        double ab = 0.0, aa = 0.0, bb = 0.0;
        for (std::size_t j = 0; j < a.size(); ++j) {
            ab += a[j] * b[j];
            aa += a[j] * a[j];
            bb += b[j] * b[j];
        }
        if (aa == 0.0 || bb == 0.0) {
            throw PreconditionError("cosine_report: zero-norm row " + std::to_string(i));
        }
        r.cosines.push_back(ab / (std::sqrt(aa) * std::sqrt(bb)));
    }
    r.mean = stats::mean(r.cosines);
    if (r.cosines.size() >= 2) r.t_vs_zero = stats::paired_mean_t(r.cosines);
    return r;
}

std::optional<stats::TStat> cosine_difference_t(const CosineReport& ab, const CosineReport& ac) {
    if (ab.cosines.size() != ac.cosines.size()) throw PreconditionError("cosine_difference_t: length mismatch");
    std::vector<double> d(ab.cosines.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = ab.cosines[i] - ac.cosines[i];
    if (d.size() < 2) return std::nullopt;
    return stats::paired_mean_t(d);
}

}  // namespace memaudit::probe
