#include "memaudit/data/text.hpp"

#include "memaudit/csv.hpp"
#include "memaudit/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

namespace memaudit::data {

namespace {

std::optional<int> parse_int_field(const std::string& raw, std::string_view what, std::size_t line) {
    std::string s = csv::trim(raw);
    if (s.empty()) return std::nullopt;
    if (!s.empty() && (s[0] == 'Q' || s[0] == 'q') && what == "quarter") s.erase(0, 1);
    int v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw DataError("unparsable " + std::string(what) + " '" + raw + "' on line " + std::to_string(line));
    }
    return v;
}

std::optional<std::string> optional_field(const csv::Row& row, std::optional<std::size_t> col) {
    if (!col || *col >= row.fields.size()) return std::nullopt;
    std::string v = csv::trim(row.fields[*col]);
    if (v.empty()) return std::nullopt;
    return v;
}

}  // namespace

std::string upper(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return out;
}

void validate(const TextRecord& record) {
    if (csv::trim(record.body).empty()) {
        throw DataError("record '" + record.record_id + "' has an empty body");
    }
    if (record.quarter) {
        if (*record.quarter < 1 || *record.quarter > 4) {
            throw DataError("record '" + record.record_id + "' has quarter outside 1-4");
        }
        if (!record.year) throw DataError("record '" + record.record_id + "' has a quarter but no year");
    }
}

std::vector<TextRecord> load_text_records(const std::filesystem::path& path) {
    auto rows = csv::read_file(path);
    if (rows.size() < 2) throw DataError("text corpus has no records: '" + path.string() + "'");
    csv::Header header(rows.front());
    const auto id_col = header.require("record_id");
    const auto date_col = header.require("date");
    const auto body_col = header.require("body");
    const auto ticker_col = header.find("ticker");
    const auto quarter_col = header.find("quarter");
    const auto year_col = header.find("year");
    const auto title_col = header.find("title");
    const auto industry_col = header.find("industry");

    std::vector<TextRecord> out;
    out.reserve(rows.size() - 1);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.fields.size() <= std::max({id_col, date_col, body_col})) {
            throw DataError("too few columns on line " + std::to_string(row.line));
        }
        TextRecord rec;
        rec.record_id = csv::trim(row.fields[id_col]);
        try {
            rec.date = parse_iso_date(csv::trim(row.fields[date_col]));
        } catch (const DataError&) {
            throw DataError("unparsable date '" + row.fields[date_col] + "' on line " + std::to_string(row.line));
        }
        rec.body = row.fields[body_col];
        rec.title = optional_field(row, title_col);
        rec.ticker = optional_field(row, ticker_col);
        if (quarter_col && *quarter_col < row.fields.size()) {
            rec.quarter = parse_int_field(row.fields[*quarter_col], "quarter", row.line);
        }
        if (year_col && *year_col < row.fields.size()) {
            rec.year = parse_int_field(row.fields[*year_col], "year", row.line);
        }
        rec.industry_label = optional_field(row, industry_col);
        validate(rec);
        out.push_back(std::move(rec));
    }
    return out;
}

CutoffSplit<TextRecord> split_by_cutoff(std::span<const TextRecord> records, Date cutoff) {
    CutoffSplit<TextRecord> split{cutoff, {}, {}};
    for (const auto& r : records) {
        if (std::chrono::sys_days{r.date} < std::chrono::sys_days{cutoff}) {
            split.pre.push_back(r);
        } else {
            split.post.push_back(r);
        }
    }
    return split;
}

IndustryMap load_industry_map(const std::filesystem::path& path) {
    auto rows = csv::read_file(path);
    if (rows.empty()) throw DataError("industry map is empty: '" + path.string() + "'");
    csv::Header header(rows.front());
    const auto t = header.require("ticker");
    const auto f5 = header.require("ff5");
    const auto f10 = header.require("ff10");
    IndustryMap map;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.fields.size() <= std::max({t, f5, f10})) {
            throw DataError("too few columns on line " + std::to_string(row.line));
        }
        map[upper(csv::trim(row.fields[t]))] = {csv::trim(row.fields[f5]), csv::trim(row.fields[f10])};
    }
    return map;
}

}  // namespace memaudit::data
