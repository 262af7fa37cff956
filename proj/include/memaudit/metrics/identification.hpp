#pragma once

#include "memaudit/data/text.hpp"
#include "memaudit/gateway/reply.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>

namespace memaudit::metrics {

struct IdentEvalRow {
    std::string record_id;
    std::string actual_ticker;
    std::optional<int> actual_quarter;
    std::optional<int> actual_year;
    std::optional<std::string> actual_industry;
    gateway::IdentificationReply predicted;
};

struct IdentSummary {
    /// Over all rows; unparsable replies count as misses.
    double firm_accuracy = 0.0;
    /// Over rows with an actual year. A quarter-year hit needs both to match.
    std::optional<double> year_accuracy;
    std::optional<double> quarter_year_accuracy;
    /// Over parsed rows with an actual year: predicted - actual.
    std::optional<double> mean_years_diff;
    std::optional<double> mean_abs_years_diff;
    /// Industry text vs the record's industry label (no map supplied).
    std::optional<double> industry_accuracy;
    /// Industry of the predicted ticker vs industry of the actual ticker,
    /// over rows whose actual ticker is in the map.
    std::optional<double> ff5_accuracy;
    std::optional<double> ff10_accuracy;
    std::size_t num_obs = 0;
    std::size_t malformed = 0;

    bool operator==(const IdentSummary&) const = default;
};

/// Tickers compare case-insensitively. Throws PreconditionError for an
/// empty input.
IdentSummary summarize_identification(std::span<const IdentEvalRow> rows,
                                      const data::IndustryMap* industry_map = nullptr);

}  // namespace memaudit::metrics
