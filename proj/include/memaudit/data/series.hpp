#pragma once

#include "memaudit/calendar.hpp"

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace memaudit::data {

/// Rate series are audited in percentage points (ME/MAE); level series in
/// percent of the actual (MPE/MAPE).
enum class SeriesKind { rate, level };

SeriesKind parse_series_kind(std::string_view text);
std::string_view to_string(SeriesKind k);

/// Which question template a recall prompt uses.
enum class QuestionStyle {
    closing_value,           // "What was the X closing value on <date>?"
    forecast_closing_value,  // "Can you forecast the X closing value on <date>?"
    period_value,            // "What was the X in June, 1995?" / "in Q4 2020?"
    end_of_month_value,      // "What was the X on <end-of-month date>?"
    closing_price,           // "What was the closing price of X on <date>?"
};

QuestionStyle parse_question_style(std::string_view text);
std::string_view to_string(QuestionStyle s);

/// How values appear inside prompt context blocks.
struct DisplayFormat {
    int decimals = 2;
    bool thousands_separator = false;
};

std::string format_value(double value, const DisplayFormat& fmt);

struct SeriesSpec {
    std::string name;
    SeriesKind kind = SeriesKind::level;
    Frequency frequency = Frequency::daily;
    std::optional<double> threshold;
    bool first_vintage = false;
    // A numeric answer of exactly 0 is treated as a withheld prediction.
    bool zero_implausible = true;
    QuestionStyle question = QuestionStyle::closing_value;
    DisplayFormat display;
};

/// Default question for a frequency: daily series ask for closing values,
/// monthly and quarterly series ask for the period value.
QuestionStyle default_question(Frequency f);

struct Observation {
    Date date;
    double value = 0.0;
    std::optional<double> market_cap;

    bool operator==(const Observation&) const = default;
};

/// Validated series: finite values, strictly increasing and unique period keys.
class Series {
public:
    Series(SeriesSpec spec, std::vector<Observation> observations);

    const SeriesSpec& spec() const { return spec_; }
    std::span<const Observation> observations() const { return observations_; }
    std::size_t size() const { return observations_.size(); }
    bool empty() const { return observations_.empty(); }
    const Observation& operator[](std::size_t i) const { return observations_[i]; }

    /// Index of the observation whose period key matches `d`, if any.
    std::optional<std::size_t> find(Date d) const;

    bool operator==(const Series& other) const;

private:
    SeriesSpec spec_;
    std::vector<Observation> observations_;
};

/// Reads `date,value[,market_cap]`. Rows are sorted by date. Throws
/// DataError on missing/empty files, unparsable rows (naming the line) and
/// duplicate periods.
Series load_series(const std::filesystem::path& path, const SeriesSpec& spec);

void write_series_csv(const Series& series, const std::filesystem::path& path);
std::string series_to_csv(const Series& series);

template <class T>
struct CutoffSplit {
    Date cutoff_date;
    std::vector<T> pre;
    std::vector<T> post;
};

/// Half-open split: dates strictly before the cutoff are `pre`, dates on or
/// after it are `post`.
CutoffSplit<Observation> split_by_cutoff(const Series& series, Date cutoff);

/// Up to `depth` observations strictly before `target`, most recent last.
std::vector<Observation> period_context(const Series& series, Date target, std::size_t depth);

}  // namespace memaudit::data
