#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace memaudit::csv {

/// One parsed record plus the 1-based line number it started on.
struct Row {
    std::size_t line = 0;
    std::vector<std::string> fields;
};

/// RFC 4180 reader: quoted fields may contain commas, doubled quotes and
/// newlines. A trailing '\r' before a newline is dropped. Blank lines are
/// skipped.
std::vector<Row> parse(std::string_view text);
std::vector<Row> read_file(const std::filesystem::path& path);

/// Header lookup with normalized (trimmed, lower-cased) names.
class Header {
public:
    explicit Header(const Row& row);
    std::optional<std::size_t> find(std::string_view name) const;
    std::size_t require(std::string_view name) const;

private:
    std::vector<std::string> names_;
};

std::string trim(std::string_view s);

/// Quote a field if it contains a comma, quote or newline.
std::string escape(std::string_view field);
std::string join(const std::vector<std::string>& fields);

/// Strict finite double parse of the whole field (surrounding spaces allowed).
std::optional<double> parse_double(std::string_view s);

/// Fixed-point formatting with a stable C-locale representation. Negative
/// zero is printed as zero.
std::string fixed(double value, int decimals);

}  // namespace memaudit::csv
