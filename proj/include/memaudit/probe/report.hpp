#pragma once

#include "memaudit/probe/matrix.hpp"
#include "memaudit/probe/ridge.hpp"
#include "memaudit/probe/schemes.hpp"
#include "memaudit/stats/tests.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace memaudit::probe {

enum class Scheme { rolling, expanding };

Scheme parse_scheme(std::string_view text);
std::string_view to_string(Scheme s);

struct ProbeConfig {
    double lambda = 0.01;
    Scheme scheme = Scheme::rolling;
    /// Rolling window in periods (60 monthly or 20 quarterly = five years).
    std::size_t window = 60;
    std::size_t folds = 10;
    std::size_t gap = 0;
    std::uint64_t seed = 0;
    bool l2_normalize = false;
    bool standardize = false;
    /// Run the single-threaded kernels instead of the OpenMP ones.
    bool serial = false;
};

struct ProbeResult {
    /// Rows predicted by both the probe and the benchmark, ascending.
    std::vector<std::size_t> indices;
    std::vector<double> actual;
    std::vector<double> model;
    std::vector<double> benchmark;
    std::optional<double> corr_model;
    std::optional<double> corr_benchmark;
    std::optional<double> corr_model_benchmark;
    std::optional<stats::TStat> williams;
    std::size_t n_predicted = 0;
    /// Caveats for the report, e.g. how the expanding scheme was read.
    std::vector<std::string> notes;
};

/// Runs the configured scheme and the SMA benchmark, keeps the rows both
/// predict, and compares corr(actual, model) with corr(actual, SMA) by
/// Williams' t. Throws PreconditionError when no row is predicted by both.
ProbeResult probe_report(const Matrix& X, std::span<const double> y, const ProbeConfig& config,
                         std::size_t benchmark_window);

/// Predictions of the configured scheme alone.
std::vector<Prediction> run_scheme(const Matrix& X, std::span<const double> y, const ProbeConfig& config);

}  // namespace memaudit::probe
