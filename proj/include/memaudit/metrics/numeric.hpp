#pragma once

#include "memaudit/data/series.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace memaudit::metrics {

/// One elicited value aligned with its actual. `prev_actual` is the actual of
/// the preceding period, carried on the row so summaries do not depend on row
/// order.
struct NumericEvalRow {
    std::string period_key;
    double actual = 0.0;
    std::optional<double> estimated;
    std::optional<double> confidence;
    bool refusal = false;
    std::optional<double> prev_actual;
    /// Refusal cause from the gateway, for the raw row files.
    std::string cause;

    /// Rows flagged as refusals or without an estimate are withheld.
    bool withheld() const { return refusal || !estimated; }
};

/// All error statistics are in percentage points. Rate series fill me/mae,
/// level series mpe/mape. Absent fields are undefined for the input (no
/// threshold, no rows with a previous actual, fewer than 3 confidence pairs
/// or constant confidence or error).
struct RecallSummary {
    data::SeriesKind kind = data::SeriesKind::level;
    std::optional<double> me;
    std::optional<double> mae;
    std::optional<double> mpe;
    std::optional<double> mape;
    std::optional<double> threshold_accuracy;
    std::optional<double> directional_accuracy;
    std::optional<double> confidence_calibration;
    std::size_t num_obs = 0;
    std::size_t refusals = 0;

    bool operator==(const RecallSummary&) const = default;
};

/// Throws PreconditionError for an empty input, a zero actual on a level
/// series, or when every row is withheld.
RecallSummary summarize_numeric(std::span<const NumericEvalRow> rows, const data::SeriesSpec& spec);

/// Per-row error used for calibration: |est - act| for rates, |est - act| /
/// |act| * 100 for levels.
double absolute_error(const NumericEvalRow& row, data::SeriesKind kind);

/// Direction of change is counted correct when both moves have the same
/// strict sign or both are exactly zero.
bool direction_correct(double estimated, double actual, double prev_actual);

/// Up/down or which-did-better answers.
struct CategoricalRow {
    std::string period_key;
    std::string actual;
    std::optional<std::string> predicted;
    std::optional<double> confidence;
    bool refusal = false;
    std::string cause;
};

struct CategoricalSummary {
    std::optional<double> accuracy;
    /// corr(confidence, 100 * miss).
    std::optional<double> confidence_calibration;
    std::size_t num_obs = 0;
    std::size_t refusals = 0;

    bool operator==(const CategoricalSummary&) const = default;
};

/// Labels are compared case-insensitively after trimming.
CategoricalSummary summarize_categorical(std::span<const CategoricalRow> rows);

}  // namespace memaudit::metrics
