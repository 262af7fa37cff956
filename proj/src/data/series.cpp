#include "memaudit/data/series.hpp"

#include "memaudit/csv.hpp"
#include "memaudit/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace memaudit::data {

SeriesKind parse_series_kind(std::string_view text) {
    if (text == "rate") return SeriesKind::rate;
    if (text == "level") return SeriesKind::level;
    throw DataError("unknown series kind '" + std::string(text) + "'");
}

std::string_view to_string(SeriesKind k) { return k == SeriesKind::rate ? "rate" : "level"; }

QuestionStyle parse_question_style(std::string_view text) {
    if (text == "closing_value") return QuestionStyle::closing_value;
    if (text == "forecast_closing_value") return QuestionStyle::forecast_closing_value;
    if (text == "period_value") return QuestionStyle::period_value;
    if (text == "end_of_month_value") return QuestionStyle::end_of_month_value;
    if (text == "closing_price") return QuestionStyle::closing_price;
    throw DataError("unknown question style '" + std::string(text) + "'");
}

std::string_view to_string(QuestionStyle s) {
    switch (s) {
        case QuestionStyle::closing_value: return "closing_value";
        case QuestionStyle::forecast_closing_value: return "forecast_closing_value";
        case QuestionStyle::period_value: return "period_value";
        case QuestionStyle::end_of_month_value: return "end_of_month_value";
        case QuestionStyle::closing_price: return "closing_price";
    }
    return "closing_value";
}

QuestionStyle default_question(Frequency f) {
    return f == Frequency::daily ? QuestionStyle::closing_value : QuestionStyle::period_value;
}

std::string format_value(double value, const DisplayFormat& fmt) {
    std::string s = csv::fixed(value, fmt.decimals);
    if (!fmt.thousands_separator) return s;
    bool negative = !s.empty() && s[0] == '-';
    std::size_t start = negative ? 1 : 0;
    std::size_t dot = s.find('.');
    std::size_t int_end = dot == std::string::npos ? s.size() : dot;
    std::string grouped;
    std::size_t digits = int_end - start;
    for (std::size_t i = 0; i < digits; ++i) {
        if (i > 0 && (digits - i) % 3 == 0) grouped.push_back(',');
        grouped.push_back(s[start + i]);
    }
    return (negative ? "-" : "") + grouped + s.substr(int_end);
}

Series::Series(SeriesSpec spec, std::vector<Observation> observations)
    : spec_(std::move(spec)), observations_(std::move(observations)) {
    std::stable_sort(observations_.begin(), observations_.end(),
                     [](const Observation& a, const Observation& b) {
                         return std::chrono::sys_days{a.date} < std::chrono::sys_days{b.date};
                     });
    for (std::size_t i = 0; i < observations_.size(); ++i) {
        const auto& o = observations_[i];
        if (!o.date.ok()) throw DataError("invalid calendar date in series '" + spec_.name + "'");
        if (!std::isfinite(o.value)) {
            throw DataError("non-finite value at " + to_iso(o.date) + " in series '" + spec_.name + "'");
        }
        if (i > 0 && period_key(observations_[i - 1].date, spec_.frequency) ==
                         period_key(o.date, spec_.frequency)) {
            throw DataError("duplicate period " + period_key(o.date, spec_.frequency) +
                            " in series '" + spec_.name + "'");
        }
    }
}

std::optional<std::size_t> Series::find(Date d) const {
    const std::string key = period_key(d, spec_.frequency);
    auto it = std::lower_bound(observations_.begin(), observations_.end(), key,
                               [this](const Observation& o, const std::string& k) {
                                   return period_key(o.date, spec_.frequency) < k;
                               });
    if (it != observations_.end() && period_key(it->date, spec_.frequency) == key) {
        return static_cast<std::size_t>(it - observations_.begin());
    }
    return std::nullopt;
}

bool Series::operator==(const Series& other) const {
    return spec_.name == other.spec_.name && spec_.kind == other.spec_.kind &&
           spec_.frequency == other.spec_.frequency && observations_ == other.observations_;
}

Series load_series(const std::filesystem::path& path, const SeriesSpec& spec) {
    if (!std::filesystem::exists(path)) {
        throw DataError("series file not found: '" + path.string() + "'");
    }
    auto rows = csv::read_file(path);
    if (rows.empty()) throw DataError("series file is empty: '" + path.string() + "'");
    csv::Header header(rows.front());
    const auto date_col = header.require("date");
    const auto value_col = header.require("value");
    const auto cap_col = header.find("market_cap");
    if (rows.size() < 2) throw DataError("series file has no data rows: '" + path.string() + "'");

    std::vector<Observation> obs;
    obs.reserve(rows.size() - 1);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        auto where = [&] { return "'" + path.filename().string() + "' row " + std::to_string(row.line); };
        if (row.fields.size() <= std::max(date_col, value_col)) {
            throw DataError("too few columns in " + where());
        }
        Observation o;
        try {
            o.date = parse_period(csv::trim(row.fields[date_col]));
        } catch (const DataError&) {
            throw DataError("unparsable date '" + row.fields[date_col] + "' in " + where());
        }
        auto value = csv::parse_double(row.fields[value_col]);
        if (!value) throw DataError("unparsable value '" + row.fields[value_col] + "' in " + where());
        o.value = *value;
        if (cap_col && *cap_col < row.fields.size() && !csv::trim(row.fields[*cap_col]).empty()) {
            auto cap = csv::parse_double(row.fields[*cap_col]);
            if (!cap) throw DataError("unparsable market_cap in " + where());
            o.market_cap = *cap;
        }
        obs.push_back(o);
    }
    return Series(spec, std::move(obs));
}

std::string series_to_csv(const Series& series) {
    bool has_cap = std::any_of(series.observations().begin(), series.observations().end(),
                               [](const Observation& o) { return o.market_cap.has_value(); });
    std::string out = has_cap ? "date,value,market_cap\n" : "date,value\n";
    char buf[64];
    for (const auto& o : series.observations()) {
        out += to_iso(o.date);
        out += ',';
        // %.17g round-trips every double exactly.
        std::snprintf(buf, sizeof buf, "%.17g", o.value);
        out += buf;
        if (has_cap) {
            out += ',';
            if (o.market_cap) {
                std::snprintf(buf, sizeof buf, "%.17g", *o.market_cap);
                out += buf;
            }
        }
        out += '\n';
    }
    return out;
}

void write_series_csv(const Series& series, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << series_to_csv(series);
}

CutoffSplit<Observation> split_by_cutoff(const Series& series, Date cutoff) {
    CutoffSplit<Observation> split{cutoff, {}, {}};
    for (const auto& o : series.observations()) {
        if (std::chrono::sys_days{o.date} < std::chrono::sys_days{cutoff}) {
            split.pre.push_back(o);
        } else {
            split.post.push_back(o);
        }
    }
    return split;
}

std::vector<Observation> period_context(const Series& series, Date target, std::size_t depth) {
    auto obs = series.observations();
    const std::string key = period_key(target, series.spec().frequency);
    // First observation whose period is not strictly before the target period.
    auto it = std::lower_bound(obs.begin(), obs.end(), key,
                               [&series](const Observation& o, const std::string& k) {
                                   return period_key(o.date, series.spec().frequency) < k;
                               });
    std::size_t end = static_cast<std::size_t>(it - obs.begin());
    std::size_t begin = end > depth ? end - depth : 0;
    return {obs.begin() + static_cast<std::ptrdiff_t>(begin), obs.begin() + static_cast<std::ptrdiff_t>(end)};
}

}  // namespace memaudit::data
