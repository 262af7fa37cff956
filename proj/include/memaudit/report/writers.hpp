#pragma once

#include "memaudit/metrics/numeric.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace memaudit::report {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Throws PreconditionError when the row width differs from the header.
    void add(std::vector<std::string> row);
};

/// Fixed-point text, or an empty cell when the value is absent.
std::string cell(std::optional<double> value, int decimals = 4);
std::string cell(std::size_t value);

std::string table_csv(const Table& t);
std::string markdown_table(const Table& t);

/// Writes bytes exactly as given. Throws DataError on failure.
void write_file(const std::filesystem::path& path, const std::string& content);

/// One compact JSON document per line.
std::string jsonl(std::span<const nlohmann::json> rows);

/// `period,actual,estimated,pct_error` with pct_error = 100 (est - act) / act.
/// Withheld rows keep their actual and leave the other two cells empty.
std::string plot_series_csv(std::span<const metrics::NumericEvalRow> rows);
void emit_plot_series(std::span<const metrics::NumericEvalRow> rows, const std::filesystem::path& path);

/// Lower-case letters and digits with runs of anything else collapsed to
/// '_', e.g. "recall_S&P 500" -> "recall_s_p_500". Throws PreconditionError
/// when nothing is left.
std::string file_stem(std::string_view name);

/// Collects the files of one run under an output directory and writes the
/// manifest last. File contents depend only on their inputs.
class BundleWriter {
public:
    explicit BundleWriter(std::filesystem::path out_dir);

    /// Tables, rows and plots are stored under file_stem(name); two names
    /// with the same stem throw PreconditionError.
    void table(const std::string& name, const Table& t);
    void rows(const std::string& name, std::span<const nlohmann::json> rows);
    void plot(const std::string& name, std::span<const metrics::NumericEvalRow> rows);
    /// Any other file, relative to the output directory.
    void file(const std::string& relative, const std::string& content);

    /// Appends to report.md.
    void heading(const std::string& text, int level = 2);
    void paragraph(const std::string& text);
    void markdown(const Table& t);

    /// Writes report.md and manifest.json. `manifest` gets a `files` array of
    /// {path, sha256} sorted by path.
    void finish(nlohmann::json manifest);

    const std::filesystem::path& out_dir() const { return out_dir_; }

private:
    void record(const std::string& relative, const std::string& content);
    std::string stem(const std::string& dir, const std::string& name);

    std::filesystem::path out_dir_;
    std::string report_;
    std::vector<std::pair<std::string, std::string>> files_;
    std::map<std::string, std::string> stems_;
};

}  // namespace memaudit::report
