#include "memaudit/metrics/dates.hpp"

#include "memaudit/csv.hpp"
#include "memaudit/error.hpp"
#include "memaudit/stats/tests.hpp"

#include <cmath>
#include <vector>

namespace memaudit::metrics {

std::optional<Date> parse_predicted_date(std::string_view text) {
    const auto t = csv::trim(text);
    if (auto d = try_parse_us_date(t)) return d;
    return try_parse_iso_date(t);
}

DateSummary summarize_dates(std::span<const DateEvalRow> rows) {
    if (rows.empty()) throw PreconditionError("summarize_dates: no rows");
    DateSummary s;
    double sum = 0.0, sum_abs = 0.0;
    std::size_t year_hits = 0, month_hits = 0, exact_hits = 0;
    std::vector<double> conf, abs_days;
    double level_sum = 0.0, level_abs = 0.0;
    std::size_t level_n = 0;

    for (const auto& r : rows) {
        if (!r.refusal && r.estimated_level && r.actual_level) {
            if (*r.actual_level == 0.0) throw PreconditionError("summarize_dates: zero actual level");
            const double e = (*r.estimated_level - *r.actual_level) / *r.actual_level * 100.0;
            level_sum += e;
            level_abs += std::fabs(e);
            ++level_n;
        }
        std::optional<Date> predicted;
        if (!r.refusal && r.predicted_text) predicted = parse_predicted_date(*r.predicted_text);
        if (!predicted) {
            ++s.refusals;
            continue;
        }
        ++s.num_obs;
        const double diff = static_cast<double>(days_between(*predicted, r.actual));
        sum += diff;
        sum_abs += std::fabs(diff);
        const bool year = year_of(*predicted) == year_of(r.actual);
        const bool month = year && month_of(*predicted) == month_of(r.actual);
        year_hits += year;
        month_hits += month;
        exact_hits += month && day_of(*predicted) == day_of(r.actual);
        if (r.confidence) {
            conf.push_back(*r.confidence);
            abs_days.push_back(std::fabs(diff));
        }
    }
    if (s.num_obs > 0) {
        const double n = static_cast<double>(s.num_obs);
        s.mean_days_diff = sum / n;
        s.mean_abs_days_diff = sum_abs / n;
        s.year_accuracy = 100.0 * static_cast<double>(year_hits) / n;
        s.month_year_accuracy = 100.0 * static_cast<double>(month_hits) / n;
        s.exact_date_accuracy = 100.0 * static_cast<double>(exact_hits) / n;
        if (conf.size() >= 3) s.confidence_calibration = stats::correlation(conf, abs_days);
    }
    if (level_n > 0) {
        s.level_mpe = level_sum / static_cast<double>(level_n);
        s.level_mape = level_abs / static_cast<double>(level_n);
    }
    return s;
}

}  // namespace memaudit::metrics
