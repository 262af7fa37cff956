#pragma once

#include "memaudit/calendar.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>

namespace memaudit::metrics {

struct DateEvalRow {
    std::string record_id;
    Date actual;
    /// As returned by the model, "mm/dd/yyyy" (ISO is also accepted).
    std::optional<std::string> predicted_text;
    std::optional<double> confidence;
    bool refusal = false;
    /// Next-day index level, when the level was asked for.
    std::optional<double> estimated_level;
    std::optional<double> actual_level;
    std::string cause;
};

struct DateSummary {
    std::optional<double> mean_days_diff;
    std::optional<double> mean_abs_days_diff;
    std::optional<double> year_accuracy;
    std::optional<double> month_year_accuracy;
    std::optional<double> exact_date_accuracy;
    /// corr(confidence, |days difference|).
    std::optional<double> confidence_calibration;
    /// Percent error of the level estimates, over rows carrying both levels.
    std::optional<double> level_mpe;
    std::optional<double> level_mape;
    std::size_t num_obs = 0;
    /// Withheld answers plus predicted dates that do not parse.
    std::size_t refusals = 0;

    bool operator==(const DateSummary&) const = default;
};

std::optional<Date> parse_predicted_date(std::string_view text);

/// Signed difference is predicted - actual in calendar days. Throws
/// PreconditionError for an empty input.
DateSummary summarize_dates(std::span<const DateEvalRow> rows);

}  // namespace memaudit::metrics
