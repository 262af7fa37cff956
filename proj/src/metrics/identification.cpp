#include "memaudit/metrics/identification.hpp"

#include "memaudit/csv.hpp"
#include "memaudit/error.hpp"

#include <cmath>
#include <cstdlib>

namespace memaudit::metrics {

namespace {

std::optional<double> pct(std::size_t hits, std::size_t total) {
    if (total == 0) return std::nullopt;
    return 100.0 * static_cast<double>(hits) / static_cast<double>(total);
}

}  // namespace

IdentSummary summarize_identification(std::span<const IdentEvalRow> rows, const data::IndustryMap* industry_map) {
    if (rows.empty()) throw PreconditionError("summarize_identification: no rows");
    IdentSummary s;
    s.num_obs = rows.size();
    std::size_t firm = 0, year_total = 0, year_hits = 0, qy_hits = 0;
    std::size_t diff_n = 0, ind_total = 0, ind_hits = 0, map_total = 0, ff5_hits = 0, ff10_hits = 0;
    double diff_sum = 0.0, diff_abs = 0.0;

    for (const auto& r : rows) {
        const bool parsed = r.predicted.status == gateway::ParseStatus::ok;
        if (!parsed) ++s.malformed;
        const auto actual = data::upper(csv::trim(r.actual_ticker));
        const auto guess = data::upper(csv::trim(r.predicted.ticker));
        if (parsed && guess == actual) ++firm;

        if (r.actual_year) {
            ++year_total;
            if (parsed) {
                const int d = r.predicted.year - *r.actual_year;
                diff_sum += d;
                diff_abs += std::abs(d);
                ++diff_n;
                if (d == 0) {
                    ++year_hits;
                    if (r.actual_quarter && *r.actual_quarter == r.predicted.quarter) ++qy_hits;
                }
            }
        }

        if (industry_map) {
            auto a = industry_map->find(actual);
            if (a != industry_map->end()) {
                ++map_total;
                auto p = parsed ? industry_map->find(guess) : industry_map->end();
                if (p != industry_map->end()) {
                    ff5_hits += p->second.ff5 == a->second.ff5;
                    ff10_hits += p->second.ff10 == a->second.ff10;
                }
            }
        } else if (r.actual_industry) {
            ++ind_total;
            if (parsed && data::upper(csv::trim(r.predicted.industry)) == data::upper(csv::trim(*r.actual_industry))) {
                ++ind_hits;
            }
        }
    }
    s.firm_accuracy = *pct(firm, rows.size());
    s.year_accuracy = pct(year_hits, year_total);
    s.quarter_year_accuracy = pct(qy_hits, year_total);
    if (diff_n > 0) {
        s.mean_years_diff = diff_sum / static_cast<double>(diff_n);
        s.mean_abs_years_diff = diff_abs / static_cast<double>(diff_n);
    }
    if (industry_map) {
        s.ff5_accuracy = pct(ff5_hits, map_total);
        s.ff10_accuracy = pct(ff10_hits, map_total);
    } else {
        s.industry_accuracy = pct(ind_hits, ind_total);
    }
    return s;
}

}  // namespace memaudit::metrics
