#pragma once

#include "memaudit/calendar.hpp"
#include "memaudit/data/series.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace memaudit::data {

struct TextRecord {
    std::string record_id;
    Date date;
    std::string body;
    std::optional<std::string> title;
    std::optional<std::string> ticker;
    std::optional<int> quarter;
    std::optional<int> year;
    std::optional<std::string> industry_label;

    bool operator==(const TextRecord&) const = default;
};

/// Throws DataError if the body is empty, the quarter is outside 1-4, or a
/// quarter is given without a year.
void validate(const TextRecord& record);

/// Reads `record_id,date,ticker,quarter,year,body` with optional `title` and
/// `industry` columns. Bodies may be quoted and span lines.
std::vector<TextRecord> load_text_records(const std::filesystem::path& path);

CutoffSplit<TextRecord> split_by_cutoff(std::span<const TextRecord> records, Date cutoff);

struct IndustryCodes {
    std::string ff5;
    std::string ff10;
};

/// Upper-cased ticker -> Fama-French style industry codes.
using IndustryMap = std::map<std::string, IndustryCodes>;

/// Reads `ticker,ff5,ff10`.
IndustryMap load_industry_map(const std::filesystem::path& path);

std::string upper(std::string_view s);

}  // namespace memaudit::data
