#include "memaudit/report/writers.hpp"

#include "memaudit/csv.hpp"
#include "memaudit/error.hpp"
#include "memaudit/gateway/digest.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

namespace memaudit::report {

using nlohmann::json;

void Table::add(std::vector<std::string> row) {
    if (row.size() != header.size()) {
        throw PreconditionError("table row has " + std::to_string(row.size()) + " cells, header has " +
                                std::to_string(header.size()));
    }
    rows.push_back(std::move(row));
}

std::string cell(std::optional<double> value, int decimals) {
    if (!value) return "";
    return csv::fixed(*value, decimals);
}

std::string cell(std::size_t value) { return std::to_string(value); }

std::string table_csv(const Table& t) {
    std::string out = csv::join(t.header) + "\n";
    for (const auto& r : t.rows) out += csv::join(r) + "\n";
    return out;
}

namespace {

std::string md_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '|') out += "\\|";
        else if (c == '\n') out += ' ';
        else out.push_back(c);
    }
    return out;
}

}  // namespace

std::string markdown_table(const Table& t) {
    std::string out = "|";
    for (const auto& h : t.header) out += " " + md_escape(h) + " |";
    out += "\n|";
    for (std::size_t i = 0; i < t.header.size(); ++i) out += " --- |";
    out += "\n";
    for (const auto& r : t.rows) {
        out += "|";
        for (const auto& c : r) out += " " + md_escape(c) + " |";
        out += "\n";
    }
    return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.close();
    if (!out) throw DataError("write failed for '" + path.string() + "'");
}

std::string jsonl(std::span<const json> rows) {
    std::string out;
    for (const auto& r : rows) out += r.dump() + "\n";
    return out;
}

std::string plot_series_csv(std::span<const metrics::NumericEvalRow> rows) {
    std::string out = "period,actual,estimated,pct_error\n";
    for (const auto& r : rows) {
        std::vector<std::string> f{r.period_key, csv::fixed(r.actual, 6), "", ""};
        if (!r.withheld()) {
            f[2] = csv::fixed(*r.estimated, 6);
            if (r.actual != 0.0) f[3] = csv::fixed(100.0 * (*r.estimated - r.actual) / r.actual, 6);
        }
        out += csv::join(f) + "\n";
    }
    return out;
}

void emit_plot_series(std::span<const metrics::NumericEvalRow> rows, const std::filesystem::path& path) {
    write_file(path, plot_series_csv(rows));
}

BundleWriter::BundleWriter(std::filesystem::path out_dir) : out_dir_(std::move(out_dir)) {}

void BundleWriter::record(const std::string& relative, const std::string& content) {
    write_file(out_dir_ / relative, content);
    auto it = std::find_if(files_.begin(), files_.end(), [&](const auto& f) { return f.first == relative; });
    if (it != files_.end()) it->second = gateway::sha256_hex(content);
    else files_.emplace_back(relative, gateway::sha256_hex(content));
}

std::string file_stem(std::string_view name) {
    std::string out;
    for (char c : name) {
        const auto u = static_cast<unsigned char>(c);
        if (std::isalnum(u)) {
            out.push_back(static_cast<char>(std::tolower(u)));
        } else if (!out.empty() && out.back() != '_') {
            out.push_back('_');
        }
    }
    while (!out.empty() && out.back() == '_') out.pop_back();
    if (out.empty()) throw PreconditionError("name '" + std::string(name) + "' has no letters or digits");
    return out;
}

std::string BundleWriter::stem(const std::string& dir, const std::string& name) {
    auto s = file_stem(name);
    auto [it, inserted] = stems_.emplace(dir + "/" + s, name);
    if (!inserted && it->second != name) {
        throw PreconditionError("output names '" + it->second + "' and '" + name + "' map to the same file");
    }
    return s;
}

void BundleWriter::table(const std::string& name, const Table& t) {
    record("tables/" + stem("tables", name) + ".csv", table_csv(t));
}

void BundleWriter::rows(const std::string& name, std::span<const json> rows) {
    record("rows/" + stem("rows", name) + ".jsonl", jsonl(rows));
}

void BundleWriter::plot(const std::string& name, std::span<const metrics::NumericEvalRow> rows) {
    record("plots/" + stem("plots", name) + ".csv", plot_series_csv(rows));
}

void BundleWriter::file(const std::string& relative, const std::string& content) { record(relative, content); }

void BundleWriter::heading(const std::string& text, int level) {
    if (!report_.empty()) report_ += "\n";
    report_ += std::string(static_cast<std::size_t>(std::clamp(level, 1, 6)), '#') + " " + text + "\n";
}

void BundleWriter::paragraph(const std::string& text) { report_ += "\n" + text + "\n"; }

void BundleWriter::markdown(const Table& t) { report_ += "\n" + markdown_table(t); }

void BundleWriter::finish(json manifest) {
    record("report.md", report_);
    auto sorted = files_;
    std::sort(sorted.begin(), sorted.end());
    json files = json::array();
    for (const auto& [path, hash] : sorted) files.push_back({{"path", path}, {"sha256", hash}});
    manifest["files"] = std::move(files);
    write_file(out_dir_ / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace memaudit::report
