#include "memaudit/probe/report.hpp"

#include "memaudit/error.hpp"

#include <map>

namespace memaudit::probe {

Scheme parse_scheme(std::string_view text) {
    if (text == "rolling") return Scheme::rolling;
    if (text == "expanding") return Scheme::expanding;
    throw PreconditionError("unknown probe scheme '" + std::string(text) + "'");
}

std::string_view to_string(Scheme s) { return s == Scheme::rolling ? "rolling" : "expanding"; }

std::vector<Prediction> run_scheme(const Matrix& X, std::span<const double> y, const ProbeConfig& config) {
    const Matrix* features = &X;
    Matrix normalized;
    if (config.l2_normalize) {
        normalized = l2_normalize_rows(X);
        features = &normalized;
    }
    const RidgeOptions opts{config.lambda, config.standardize};
    if (config.scheme == Scheme::rolling) {
        return config.serial ? rolling_predict_serial(*features, y, config.window, opts)
                             : rolling_predict(*features, y, config.window, opts);
    }
    return config.serial ? expanding_predict_serial(*features, y, config.folds, config.gap, opts)
                         : expanding_predict(*features, y, config.folds, config.gap, opts);
}

ProbeResult probe_report(const Matrix& X, std::span<const double> y, const ProbeConfig& config,
                         std::size_t benchmark_window) {
    const auto model = run_scheme(X, y, config);
    const auto sma = sma_benchmark(y, benchmark_window);
    std::map<std::size_t, double> sma_at;
    for (const auto& p : sma) sma_at[p.index] = p.value;

    ProbeResult r;
    for (const auto& p : model) {
        auto it = sma_at.find(p.index);
        if (it == sma_at.end()) continue;
        r.indices.push_back(p.index);
        r.actual.push_back(y[p.index]);
        r.model.push_back(p.value);
        r.benchmark.push_back(it->second);
    }
    r.n_predicted = r.indices.size();
    if (r.n_predicted == 0) throw PreconditionError("probe_report: no period is predicted by both probe and SMA");

    if (r.n_predicted >= 3) {
        r.corr_model = stats::correlation(r.actual, r.model);
        r.corr_benchmark = stats::correlation(r.actual, r.benchmark);
        r.corr_model_benchmark = stats::correlation(r.model, r.benchmark);
    }
    if (r.corr_model && r.corr_benchmark && r.corr_model_benchmark && r.n_predicted >= 4) {
        r.williams = stats::williams_t({*r.corr_model, *r.corr_benchmark, *r.corr_model_benchmark, r.n_predicted});
    }
    if (config.scheme == Scheme::expanding) {
        r.notes.push_back("Expanding scheme trains on folds 1..k and tests on fold k+1+gap with gap=" +
                          std::to_string(config.gap) +
                          "; a one-fold gap between training and test data is the alternative reading (gap=1).");
    }
    r.notes.push_back(config.l2_normalize ? "Embeddings L2-normalized per row before fitting."
                                          : "Embeddings used as returned (no L2 normalization).");
    return r;
}

}  // namespace memaudit::probe
