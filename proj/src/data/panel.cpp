#include "memaudit/data/panel.hpp"

#include "memaudit/csv.hpp"
#include "memaudit/error.hpp"
#include "memaudit/random.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <map>

namespace memaudit::data {

double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw PreconditionError("quantile of empty sample");
    std::sort(values.begin(), values.end());
    double pos = q * static_cast<double>(values.size() - 1);
    auto lo = static_cast<std::size_t>(std::floor(pos));
    auto hi = std::min(lo + 1, values.size() - 1);
    double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

SizeSample size_bucket_sample(std::span<const PanelEntry> panel,
                              const std::set<std::string>& benchmark_subset, int buckets,
                              int per_bucket, std::uint64_t seed) {
    if (buckets < 2) throw PreconditionError("size_bucket_sample: buckets must be >= 2");
    if (per_bucket < 1) throw PreconditionError("size_bucket_sample: per_bucket must be >= 1");

    SizeSample out;
    std::map<int, std::vector<const PanelEntry*>> by_year;
    for (const auto& e : panel) {
        if (!e.market_cap) {
            out.warnings.push_back("missing market_cap for " + e.ticker + " in " + std::to_string(e.year) +
                                   "; row excluded");
            spdlog::warn("{}", out.warnings.back());
            continue;
        }
        if (!(*e.market_cap > 0.0) || !std::isfinite(*e.market_cap)) {
            throw DataError("non-positive market_cap for " + e.ticker + " in " + std::to_string(e.year));
        }
        by_year[e.year].push_back(&e);
    }

    for (auto& [year, entries] : by_year) {
        std::vector<double> bench_caps;
        for (const auto* e : entries) {
            if (benchmark_subset.count(e->ticker)) bench_caps.push_back(*e->market_cap);
        }
        if (bench_caps.empty()) {
            throw DataError("empty benchmark subset in " + std::to_string(year));
        }
        YearBreakpoints bp{year, {}};
        for (int k = 1; k < buckets; ++k) {
            bp.breakpoints.push_back(quantile(bench_caps, static_cast<double>(k) / buckets));
        }

        std::vector<std::vector<const PanelEntry*>> members(static_cast<std::size_t>(buckets));
        for (const auto* e : entries) {
            auto above = std::count_if(bp.breakpoints.begin(), bp.breakpoints.end(),
                                       [&](double cut) { return *e->market_cap > cut; });
            members[static_cast<std::size_t>(above)].push_back(e);
        }

        for (int b = 0; b < buckets; ++b) {
            auto& pool = members[static_cast<std::size_t>(b)];
            // Canonical order so the draw does not depend on input row order.
            std::sort(pool.begin(), pool.end(), [](const PanelEntry* l, const PanelEntry* r) {
                return l->ticker < r->ticker;
            });
            std::mt19937_64 rng(derive_seed(seed, {static_cast<std::uint64_t>(year),
                                                   static_cast<std::uint64_t>(b)}));
            std::size_t take = std::min(pool.size(), static_cast<std::size_t>(per_bucket));
            // Partial Fisher-Yates.
            for (std::size_t i = 0; i < take; ++i) {
                std::size_t j = i + static_cast<std::size_t>(uniform_index(rng, pool.size() - i));
                std::swap(pool[i], pool[j]);
            }
            std::vector<const PanelEntry*> chosen(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(take));
            std::sort(chosen.begin(), chosen.end(), [](const PanelEntry* l, const PanelEntry* r) {
                return l->ticker < r->ticker;
            });
            for (const auto* e : chosen) {
                out.assets.push_back({e->ticker, year, *e->market_cap, b + 1});
            }
        }
        out.breakpoints.push_back(std::move(bp));
    }
    return out;
}

std::vector<PanelEntry> load_panel(const std::filesystem::path& path) {
    auto rows = csv::read_file(path);
    if (rows.size() < 2) throw DataError("panel file has no rows: '" + path.string() + "'");
    csv::Header header(rows.front());
    const auto t = header.require("ticker");
    const auto y = header.require("year");
    const auto c = header.require("market_cap");
    std::vector<PanelEntry> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.fields.size() <= std::max({t, y, c})) {
            throw DataError("too few columns on line " + std::to_string(row.line));
        }
        PanelEntry e;
        e.ticker = csv::trim(row.fields[t]);
        auto year = csv::parse_double(row.fields[y]);
        if (!year || *year != std::floor(*year)) {
            throw DataError("unparsable year on line " + std::to_string(row.line));
        }
        e.year = static_cast<int>(*year);
        if (!csv::trim(row.fields[c]).empty()) {
            auto cap = csv::parse_double(row.fields[c]);
            if (!cap) throw DataError("unparsable market_cap on line " + std::to_string(row.line));
            e.market_cap = *cap;
        }
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace memaudit::data
