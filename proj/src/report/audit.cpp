#include "memaudit/report/audit.hpp"

#include "memaudit/csv.hpp"
#include "memaudit/data/panel.hpp"
#include "memaudit/data/series.hpp"
#include "memaudit/data/text.hpp"
#include "memaudit/error.hpp"
#include "memaudit/gateway/digest.hpp"
#include "memaudit/metrics/dates.hpp"
#include "memaudit/metrics/identification.hpp"
#include "memaudit/metrics/masking.hpp"
#include "memaudit/metrics/numeric.hpp"
#include "memaudit/probe/placebo.hpp"
#include "memaudit/probe/report.hpp"
#include "memaudit/prompt/render.hpp"
#include "memaudit/report/writers.hpp"
#include "memaudit/stats/power.hpp"
#include "memaudit/theory/worlds.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <map>
#include <set>
#include <sstream>

namespace memaudit::report {

using nlohmann::json;
using gateway::ConfigError;

Subcommand parse_subcommand(std::string_view text) {
    for (auto s : {Subcommand::recall, Subcommand::cutoff, Subcommand::mask, Subcommand::embed, Subcommand::power,
                   Subcommand::theory_demo}) {
        if (to_string(s) == text) return s;
    }
    throw PreconditionError("unknown subcommand '" + std::string(text) + "'");
}

std::string_view to_string(Subcommand s) {
    switch (s) {
        case Subcommand::recall: return "recall";
        case Subcommand::cutoff: return "cutoff";
        case Subcommand::mask: return "mask";
        case Subcommand::embed: return "embed";
        case Subcommand::power: return "power";
        case Subcommand::theory_demo: return "theory-demo";
    }
    return "recall";
}

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }
json opt(const std::optional<std::string>& v) { return v ? json(*v) : json(nullptr); }

std::string pct(double v) { return csv::fixed(v, 4); }

struct Context {
    const AuditConfig& cfg;
    BundleWriter& out;
    prompt::RenderOptions render;
    std::unique_ptr<gateway::Gateway> gateway;
    std::size_t refusals = 0;
    std::vector<std::string> warnings;

    gateway::Gateway& gw() {
        if (!gateway) throw ConfigError("this audit needs a provider gateway");
        return *gateway;
    }

    void warn(std::string msg) {
        spdlog::warn("{}", msg);
        warnings.push_back(std::move(msg));
    }

    std::vector<gateway::ModelReply> ask(const std::vector<prompt::PromptBundle>& bundles) {
        std::vector<gateway::ChatRequest> requests;
        requests.reserve(bundles.size());
        for (const auto& b : bundles) requests.push_back({b, "", 0.0});
        return gw().complete_all(requests);
    }

    data::Series load(const std::string& name) const {
        const auto& entry = cfg.find_series(name);
        return data::load_series(entry.path, entry.spec);
    }
};

// ---- numeric recall tables ----

std::vector<std::string> recall_header(data::SeriesKind kind, bool threshold, std::vector<std::string> lead) {
    auto h = std::move(lead);
    if (kind == data::SeriesKind::rate) {
        h.insert(h.end(), {"ME (%)", "MAE (%)"});
    } else {
        h.insert(h.end(), {"MPE (%)", "MAPE (%)"});
    }
    if (threshold) h.push_back("Threshold Accuracy (%)");
    h.insert(h.end(), {"Directional Accuracy (%)", "Confidence Calibration", "Num Obs", "Refusals"});
    return h;
}

std::vector<std::string> recall_cells(const metrics::RecallSummary& s, bool threshold, std::vector<std::string> lead) {
    auto r = std::move(lead);
    if (s.kind == data::SeriesKind::rate) {
        r.insert(r.end(), {cell(s.me), cell(s.mae)});
    } else {
        r.insert(r.end(), {cell(s.mpe), cell(s.mape)});
    }
    if (threshold) r.push_back(cell(s.threshold_accuracy));
    r.insert(r.end(), {cell(s.directional_accuracy), cell(s.confidence_calibration), cell(s.num_obs),
                       cell(s.refusals)});
    return r;
}

metrics::RecallSummary summarize(std::span<const metrics::NumericEvalRow> rows, const data::SeriesSpec& spec) {
    const bool all_withheld =
        std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.withheld(); });
    if (rows.empty() || all_withheld) {
        metrics::RecallSummary s;
        s.kind = spec.kind;
        s.refusals = rows.size();
        return s;
    }
    return metrics::summarize_numeric(rows, spec);
}

template <class Row, class DateOf>
std::vector<std::pair<std::string, std::vector<Row>>> samples(const std::vector<Row>& rows, std::optional<Date> cutoff,
                                                              DateOf date_of) {
    std::vector<std::pair<std::string, std::vector<Row>>> out;
    if (cutoff) {
        std::vector<Row> pre, post;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            (date_of(i) < *cutoff ? pre : post).push_back(rows[i]);
        }
        out.emplace_back("Pre-cutoff", std::move(pre));
        out.emplace_back("Post-cutoff", std::move(post));
    }
    out.emplace_back("Full", rows);
    return out;
}

metrics::NumericEvalRow numeric_row(std::string key, double actual, gateway::ModelReply reply, bool zero_implausible,
                                    std::optional<double> prev) {
    gateway::apply_zero_rule(reply, zero_implausible);
    metrics::NumericEvalRow row;
    row.period_key = std::move(key);
    row.actual = actual;
    row.estimated = reply.refusal ? std::nullopt : reply.answer_numeric;
    row.confidence = reply.confidence;
    row.refusal = reply.refusal;
    row.prev_actual = prev;
    row.cause = reply.cause;
    return row;
}

json numeric_row_json(const metrics::NumericEvalRow& r, const gateway::ModelReply& reply, json extra) {
    extra["period"] = r.period_key;
    extra["actual"] = r.actual;
    extra["estimated"] = opt(r.estimated);
    extra["confidence"] = opt(r.confidence);
    extra["prev_actual"] = opt(r.prev_actual);
    extra["refusal"] = r.refusal;
    extra["cause"] = r.cause;
    extra["raw_reply"] = reply.raw_text;
    return extra;
}

struct NumericRun {
    std::vector<metrics::NumericEvalRow> rows;
    std::vector<Date> dates;
    std::vector<json> raw;
};

NumericRun recall_series(Context& ctx, const data::Series& series, std::size_t depth,
                         const prompt::CutoffDirective& directive, json tag) {
    const auto& spec = series.spec();
    std::vector<prompt::PromptBundle> bundles;
    for (const auto& obs : series.observations()) {
        auto context = data::period_context(series, obs.date, depth);
        bundles.push_back(prompt::render_recall(spec, obs.date, context, directive, ctx.render));
    }
    auto replies = ctx.ask(bundles);
    NumericRun run;
    for (std::size_t i = 0; i < series.size(); ++i) {
        std::optional<double> prev;
        if (i > 0) prev = series[i - 1].value;
        auto row = numeric_row(period_key(series[i].date, spec.frequency), series[i].value, replies[i],
                               spec.zero_implausible, prev);
        if (row.refusal) ++ctx.refusals;
        run.raw.push_back(numeric_row_json(row, replies[i], tag));
        run.rows.push_back(std::move(row));
        run.dates.push_back(series[i].date);
    }
    return run;
}

void add_numeric_samples(Table& table, const NumericRun& run, const data::SeriesSpec& spec, bool threshold,
                         std::optional<Date> cutoff, const std::vector<std::string>& lead) {
    for (const auto& [label, rows] : samples(run.rows, cutoff, [&](std::size_t i) { return run.dates[i]; })) {
        auto l = lead;
        l.push_back(label);
        table.add(recall_cells(summarize(rows, spec), threshold, l));
    }
}

// ---- categorical helpers ----

/// Last observation of each calendar month (or year), in order.
std::vector<data::Observation> period_ends(const data::Series& s, bool yearly) {
    std::vector<data::Observation> out;
    for (const auto& o : s.observations()) {
        const bool same = !out.empty() && year_of(out.back().date) == year_of(o.date) &&
                          (yearly || month_of(out.back().date) == month_of(o.date));
        if (same) out.back() = o;
        else out.push_back(o);
    }
    return out;
}

std::vector<std::string> categorical_header(std::vector<std::string> lead) {
    lead.insert(lead.end(), {"Accuracy (%)", "Confidence Calibration", "Num Obs", "Refusals"});
    return lead;
}

void add_categorical_samples(Table& table, const std::vector<metrics::CategoricalRow>& rows,
                             const std::vector<Date>& dates, std::optional<Date> cutoff,
                             const std::vector<std::string>& lead) {
    for (const auto& [label, subset] : samples(rows, cutoff, [&](std::size_t i) { return dates[i]; })) {
        auto r = lead;
        r.push_back(label);
        if (subset.empty()) {
            r.insert(r.end(), {"", "", "0", "0"});
        } else {
            auto s = metrics::summarize_categorical(subset);
            r.insert(r.end(), {cell(s.accuracy), cell(s.confidence_calibration), cell(s.num_obs), cell(s.refusals)});
        }
        table.add(std::move(r));
    }
}

metrics::CategoricalRow categorical_row(std::string key, std::string actual, const gateway::ModelReply& reply) {
    metrics::CategoricalRow row;
    row.period_key = std::move(key);
    row.actual = std::move(actual);
    row.predicted = reply.refusal ? std::nullopt : reply.answer_text;
    row.confidence = reply.confidence;
    row.refusal = reply.refusal;
    row.cause = reply.cause;
    return row;
}

json categorical_json(const metrics::CategoricalRow& r, const gateway::ModelReply& reply, json extra) {
    extra["period"] = r.period_key;
    extra["actual"] = r.actual;
    extra["predicted"] = opt(r.predicted);
    extra["confidence"] = opt(r.confidence);
    extra["refusal"] = r.refusal;
    extra["cause"] = r.cause;
    extra["raw_reply"] = reply.raw_text;
    return extra;
}

std::string month_key(Date d) { return period_key(d, Frequency::monthly); }

// ---- recall ----

void recall_numeric(Context& ctx, const RecallConfig& rc) {
    const auto& cfg = ctx.cfg;
    prompt::CutoffDirective directive;
    directive.model_cutoff = cfg.provider.model_cutoff;
    for (const auto& name : rc.series) {
        const auto& entry = cfg.find_series(name);
        auto series = data::load_series(entry.path, entry.spec);
        Table table{recall_header(entry.spec.kind, entry.threshold_accuracy, {"Series", "Context", "Sample"}), {}};
        std::vector<json> raw;
        for (auto depth : rc.context_depths) {
            auto run = recall_series(ctx, series, depth, directive,
                                     {{"series", name}, {"context_depth", depth}, {"task", "recall"}});
            add_numeric_samples(table, run, entry.spec, entry.threshold_accuracy, cfg.cutoff_date,
                                {name, std::to_string(depth)});
            ctx.out.plot("recall_" + name + "_ctx" + std::to_string(depth), run.rows);
            raw.insert(raw.end(), run.raw.begin(), run.raw.end());
        }
        ctx.out.table("recall_" + name, table);
        ctx.out.rows("recall_" + name, raw);
        ctx.out.heading("Recall: " + name, 3);
        ctx.out.markdown(table);
    }
}

void recall_direction(Context& ctx, const RecallConfig& rc) {
    const auto& cfg = ctx.cfg;
    if (!rc.direction.empty()) {
        Table table{categorical_header({"Series", "Sample"}), {}};
        std::vector<json> raw;
        for (const auto& name : rc.direction) {
            auto months = period_ends(ctx.load(name), false);
            std::vector<prompt::PromptBundle> bundles;
            std::vector<std::string> names{name};
            for (std::size_t i = 1; i < months.size(); ++i) {
                bundles.push_back(prompt::render_direction_relative(prompt::CategoricalKind::direction, names,
                                                                    months[i].date, ctx.render));
            }
            auto replies = ctx.ask(bundles);
            std::vector<metrics::CategoricalRow> rows;
            std::vector<Date> dates;
            for (std::size_t i = 1; i < months.size(); ++i) {
                const auto& reply = replies[i - 1];
                std::string actual = months[i].value > months[i - 1].value ? "up" : "down";
                rows.push_back(categorical_row(month_key(months[i].date), actual, reply));
                dates.push_back(months[i].date);
                if (rows.back().refusal) ++ctx.refusals;
                raw.push_back(categorical_json(rows.back(), reply, {{"series", name}, {"task", "direction"}}));
            }
            add_categorical_samples(table, rows, dates, cfg.cutoff_date, {name});
        }
        ctx.out.table("direction", table);
        ctx.out.rows("direction", raw);
        ctx.out.heading("Monthly direction", 3);
        ctx.out.markdown(table);
    }

    if (!rc.pct_change.empty()) {
        std::vector<json> raw;
        Table table{recall_header(data::SeriesKind::rate, false, {"Series", "Sample"}), {}};
        for (const auto& name : rc.pct_change) {
            const auto& entry = cfg.find_series(name);
            auto months = period_ends(ctx.load(name), false);
            data::SeriesSpec spec = entry.spec;
            spec.kind = data::SeriesKind::rate;
            spec.threshold.reset();
            std::vector<prompt::PromptBundle> bundles;
            std::vector<std::size_t> kept;
            std::vector<std::string> names{name};
            for (std::size_t i = 1; i < months.size(); ++i) {
                if (months[i - 1].value == 0.0) continue;
                kept.push_back(i);
                bundles.push_back(prompt::render_direction_relative(prompt::CategoricalKind::pct_change, names,
                                                                    months[i].date, ctx.render));
            }
            auto replies = ctx.ask(bundles);
            NumericRun run;
            for (std::size_t k = 0; k < kept.size(); ++k) {
                const auto i = kept[k];
                const double change = 100.0 * (months[i].value / months[i - 1].value - 1.0);
                auto row = numeric_row(month_key(months[i].date), change, replies[k], spec.zero_implausible,
                                       std::nullopt);
                if (row.refusal) ++ctx.refusals;
                raw.push_back(numeric_row_json(row, replies[k], {{"series", name}, {"task", "pct_change"}}));
                run.rows.push_back(std::move(row));
                run.dates.push_back(months[i].date);
            }
            add_numeric_samples(table, run, spec, false, cfg.cutoff_date, {name});
        }
        ctx.out.table("pct_change", table);
        ctx.out.rows("pct_change", raw);
        ctx.out.heading("Monthly percentage change", 3);
        ctx.out.markdown(table);
    }

    if (!rc.relative.empty()) {
        Table table{categorical_header({"Pair", "Sample"}), {}};
        std::vector<json> raw;
        for (const auto& [a, b] : rc.relative) {
            auto ya = period_ends(ctx.load(a), true);
            auto yb = period_ends(ctx.load(b), true);
            std::map<int, double> ra, rb;
            for (std::size_t i = 1; i < ya.size(); ++i) {
                if (ya[i - 1].value != 0.0) ra[year_of(ya[i].date)] = ya[i].value / ya[i - 1].value - 1.0;
            }
            for (std::size_t i = 1; i < yb.size(); ++i) {
                if (yb[i - 1].value != 0.0) rb[year_of(yb[i].date)] = yb[i].value / yb[i - 1].value - 1.0;
            }
            std::vector<int> years;
            std::vector<prompt::PromptBundle> bundles;
            std::vector<std::string> names{a, b};
            for (const auto& [year, ret] : ra) {
                if (!rb.count(year)) continue;
                years.push_back(year);
                Date d{std::chrono::year{year}, std::chrono::December, std::chrono::day{31}};
                bundles.push_back(
                    prompt::render_direction_relative(prompt::CategoricalKind::relative, names, d, ctx.render));
            }
            auto replies = ctx.ask(bundles);
            std::vector<metrics::CategoricalRow> rows;
            std::vector<Date> dates;
            for (std::size_t k = 0; k < years.size(); ++k) {
                const int y = years[k];
                const std::string actual = ra[y] >= rb[y] ? a : b;
                rows.push_back(categorical_row(std::to_string(y), actual, replies[k]));
                dates.push_back(Date{std::chrono::year{y}, std::chrono::January, std::chrono::day{1}});
                if (rows.back().refusal) ++ctx.refusals;
                raw.push_back(categorical_json(rows.back(), replies[k],
                                               {{"pair", json::array({a, b})}, {"task", "relative"}}));
            }
            add_categorical_samples(table, rows, dates, cfg.cutoff_date, {a + " vs " + b});
        }
        ctx.out.table("relative", table);
        ctx.out.rows("relative", raw);
        ctx.out.heading("Annual relative performance", 3);
        ctx.out.markdown(table);
    }
}

void recall_headlines(Context& ctx, const HeadlineConfig& hc) {
    const auto& cfg = ctx.cfg;
    auto records = data::load_text_records(hc.path);
    std::map<Date, std::vector<data::TextRecord>> by_date;
    for (auto& r : records) by_date[r.date].push_back(std::move(r));

    std::optional<data::Series> level;
    std::string data_name = "S&P 500";
    if (hc.want_level) {
        level = ctx.load(hc.level_series);
        data_name = hc.level_series;
    }
    std::vector<prompt::PromptBundle> bundles;
    std::vector<Date> dates;
    for (const auto& [date, group] : by_date) {
        bundles.push_back(prompt::render_headline(group, hc.want_level, data_name, ctx.render));
        dates.push_back(date);
    }
    auto replies = ctx.ask(bundles);
    std::vector<metrics::DateEvalRow> rows;
    std::vector<json> raw;
    for (std::size_t i = 0; i < dates.size(); ++i) {
        const auto& reply = replies[i];
        metrics::DateEvalRow row;
        row.record_id = to_iso(dates[i]);
        row.actual = dates[i];
        row.predicted_text = reply.refusal ? std::nullopt : reply.date_text;
        row.confidence = reply.confidence;
        row.refusal = reply.refusal;
        row.cause = reply.cause;
        if (level) {
            auto obs = level->observations();
            auto it = std::upper_bound(obs.begin(), obs.end(), dates[i],
                                       [](Date d, const data::Observation& o) { return d < o.date; });
            if (it != obs.end()) row.actual_level = it->value;
            row.estimated_level = reply.refusal ? std::nullopt : reply.answer_numeric;
        }
        if (row.refusal) ++ctx.refusals;
        raw.push_back({{"date", row.record_id},
                       {"headlines", by_date[dates[i]].size()},
                       {"predicted", opt(row.predicted_text)},
                       {"confidence", opt(row.confidence)},
                       {"estimated_level", opt(row.estimated_level)},
                       {"actual_level", opt(row.actual_level)},
                       {"refusal", row.refusal},
                       {"cause", row.cause},
                       {"raw_reply", reply.raw_text}});
        rows.push_back(std::move(row));
    }

    std::vector<std::string> header{"Sample",
                                     "Mean Days Difference",
                                     "Mean Absolute Days Difference",
                                     "Year Accuracy (%)",
                                     "Month and Year Accuracy (%)",
                                     "Exact Date Accuracy (%)",
                                     "Confidence Calibration"};
    if (hc.want_level) header.insert(header.end(), {"MPE (%)", "MAPE (%)"});
    header.insert(header.end(), {"Num Obs", "Refusals"});
    Table table{header, {}};
    for (const auto& [label, subset] : samples(rows, cfg.cutoff_date, [&](std::size_t i) { return dates[i]; })) {
        std::vector<std::string> r{label};
        if (subset.empty()) {
            r.resize(header.size());
            r[header.size() - 2] = "0";
            r[header.size() - 1] = "0";
            table.add(std::move(r));
            continue;
        }
        auto s = metrics::summarize_dates(subset);
        r.insert(r.end(), {cell(s.mean_days_diff), cell(s.mean_abs_days_diff), cell(s.year_accuracy),
                           cell(s.month_year_accuracy), cell(s.exact_date_accuracy), cell(s.confidence_calibration)});
        if (hc.want_level) r.insert(r.end(), {cell(s.level_mpe), cell(s.level_mape)});
        r.insert(r.end(), {cell(s.num_obs), cell(s.refusals)});
        table.add(std::move(r));
    }
    ctx.out.table("headlines", table);
    ctx.out.rows("headlines", raw);
    ctx.out.heading("Headline dating", 3);
    ctx.out.markdown(table);
}

std::set<std::string> read_ticker_list(const std::filesystem::path& path) {
    auto rows = csv::read_file(path);
    std::set<std::string> out;
    if (rows.empty()) throw DataError("benchmark list '" + path.string() + "' is empty");
    std::size_t col = 0;
    std::size_t first = 0;
    csv::Header header(rows.front());
    if (auto c = header.find("ticker")) {
        col = *c;
        first = 1;
    }
    for (std::size_t i = first; i < rows.size(); ++i) {
        if (col < rows[i].fields.size()) {
            auto t = data::upper(csv::trim(rows[i].fields[col]));
            if (!t.empty()) out.insert(t);
        }
    }
    return out;
}

void recall_size_panel(Context& ctx, const SizePanelConfig& sp) {
    const auto& cfg = ctx.cfg;
    auto panel = data::load_panel(sp.panel);
    auto benchmark = read_ticker_list(sp.benchmark);
    auto sample = data::size_bucket_sample(panel, benchmark, sp.buckets, sp.per_bucket, *cfg.seed);
    for (const auto& w : sample.warnings) ctx.warn(w);

    Table bp{{"Year", "Breakpoints"}, {}};
    for (const auto& y : sample.breakpoints) {
        std::string joined;
        for (double b : y.breakpoints) joined += (joined.empty() ? "" : ";") + csv::fixed(b, 2);
        bp.add({std::to_string(y.year), joined});
    }
    ctx.out.table("size_breakpoints", bp);

    data::SeriesSpec base;
    base.kind = data::SeriesKind::level;
    base.frequency = Frequency::monthly;
    base.question = data::QuestionStyle::closing_price;

    std::vector<prompt::PromptBundle> bundles;
    std::vector<std::pair<const data::SampledAsset*, data::Observation>> targets;
    std::map<std::string, data::Series> cache;
    for (const auto& asset : sample.assets) {
        auto it = cache.find(asset.ticker);
        if (it == cache.end()) {
            const auto path = sp.prices_dir / (asset.ticker + ".csv");
            if (!std::filesystem::exists(path)) {
                ctx.warn("no price file for " + asset.ticker + "; skipped");
                continue;
            }
            auto spec = base;
            spec.name = asset.ticker;
            it = cache.emplace(asset.ticker, data::load_series(path, spec)).first;
        }
        for (const auto& obs : it->second.observations()) {
            if (year_of(obs.date) != asset.year) continue;
            bundles.push_back(prompt::render_recall(it->second.spec(), obs.date, {}, {}, ctx.render));
            targets.emplace_back(&asset, obs);
        }
    }
    auto replies = ctx.ask(bundles);
    std::map<int, std::vector<metrics::NumericEvalRow>> by_bucket;
    std::vector<json> raw;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const auto& [asset, obs] = targets[i];
        auto row = numeric_row(asset->ticker + ":" + period_key(obs.date, Frequency::monthly), obs.value, replies[i],
                               true, std::nullopt);
        if (row.refusal) ++ctx.refusals;
        raw.push_back(numeric_row_json(row, replies[i],
                                       {{"ticker", asset->ticker}, {"bucket", asset->bucket}, {"year", asset->year}}));
        by_bucket[asset->bucket].push_back(std::move(row));
    }
    Table table{recall_header(data::SeriesKind::level, false, {"Size Bucket"}), {}};
    for (const auto& [bucket, rows] : by_bucket) {
        table.add(recall_cells(summarize(rows, base), false, {std::to_string(bucket)}));
    }
    ctx.out.table("size_buckets", table);
    ctx.out.rows("size_buckets", raw);
    ctx.out.heading("Closing prices by size bucket", 3);
    ctx.out.markdown(table);
}

void run_recall(Context& ctx) {
    if (!ctx.cfg.recall) throw ConfigError("config has no 'recall' section");
    const auto& rc = *ctx.cfg.recall;
    ctx.out.heading("Recall audits");
    if (ctx.cfg.cutoff_date) ctx.out.paragraph("Split date: " + to_iso(*ctx.cfg.cutoff_date) + ".");
    recall_numeric(ctx, rc);
    recall_direction(ctx, rc);
    if (rc.headlines) recall_headlines(ctx, *rc.headlines);
    if (rc.size_panel) recall_size_panel(ctx, *rc.size_panel);
}

// ---- cutoff ----

void run_cutoff(Context& ctx) {
    if (!ctx.cfg.cutoff) throw ConfigError("config has no 'cutoff' section");
    const auto& cc = *ctx.cfg.cutoff;
    ctx.out.heading("Fake knowledge cutoff");
    ctx.out.paragraph("Fake cutoff: " + to_iso(cc.fake_cutoff) + ".");
    for (const auto& name : cc.series) {
        const auto& entry = ctx.cfg.find_series(name);
        auto series = data::load_series(entry.path, entry.spec);
        Table table{recall_header(entry.spec.kind, entry.threshold_accuracy, {"Series", "Directive", "Sample"}), {}};
        std::vector<json> raw;
        for (auto mode : cc.modes) {
            prompt::CutoffDirective d;
            d.mode = mode;
            d.fake_cutoff = cc.fake_cutoff;
            d.current_date = cc.current_date;
            d.model_cutoff = ctx.cfg.provider.model_cutoff;
            const std::string mode_name(prompt::to_string(mode));
            auto run = recall_series(ctx, series, 0, d, {{"series", name}, {"directive", mode_name}, {"task", "cutoff"}});
            add_numeric_samples(table, run, entry.spec, entry.threshold_accuracy, cc.fake_cutoff, {name, mode_name});
            ctx.out.plot("cutoff_" + name + "_" + mode_name, run.rows);
            raw.insert(raw.end(), run.raw.begin(), run.raw.end());
        }
        ctx.out.table("cutoff_" + name, table);
        ctx.out.rows("cutoff_" + name, raw);
        ctx.out.heading("Cutoff directives: " + name, 3);
        ctx.out.markdown(table);
    }
}

// ---- mask ----

void run_mask(Context& ctx) {
    if (!ctx.cfg.mask) throw ConfigError("config has no 'mask' section");
    const auto& mc = *ctx.cfg.mask;
    auto records = data::load_text_records(mc.transcripts);
    std::vector<data::TextRecord> usable;
    for (auto& r : records) {
        if (!r.ticker || r.ticker->empty()) {
            ctx.warn("record " + r.record_id + " has no ticker; skipped");
            continue;
        }
        usable.push_back(std::move(r));
    }
    if (usable.empty()) throw DataError("no transcript records with a ticker");

    std::vector<prompt::MaskingPair> pairs;
    std::vector<prompt::PromptBundle> anonymize;
    for (const auto& r : usable) {
        pairs.push_back(prompt::render_masking_pair(r.body, ctx.render));
        anonymize.push_back(pairs.back().anonymize);
    }
    auto masked = ctx.ask(anonymize);

    std::vector<prompt::PromptBundle> identify;
    std::vector<std::size_t> asked;
    for (std::size_t i = 0; i < usable.size(); ++i) {
        if (masked[i].refusal || !masked[i].answer_text) continue;
        identify.push_back(prompt::fill_identification(pairs[i].identify_template, *masked[i].answer_text));
        asked.push_back(i);
    }
    auto answers = ctx.ask(identify);
    std::vector<std::optional<gateway::ModelReply>> by_record(usable.size());
    for (std::size_t k = 0; k < asked.size(); ++k) by_record[asked[k]] = answers[k];

    std::vector<metrics::IdentEvalRow> rows;
    std::vector<json> raw;
    std::map<std::string, std::size_t> counts;
    for (std::size_t i = 0; i < usable.size(); ++i) {
        const auto& rec = usable[i];
        metrics::IdentEvalRow row;
        row.record_id = rec.record_id;
        row.actual_ticker = data::upper(*rec.ticker);
        row.actual_quarter = rec.quarter;
        row.actual_year = rec.year;
        row.actual_industry = rec.industry_label;
        std::string cause;
        if (by_record[i] && !by_record[i]->refusal) {
            row.predicted = gateway::parse_identification_reply(by_record[i]->raw_text);
            if (row.predicted.status != gateway::ParseStatus::ok) cause = "malformed";
        } else {
            cause = by_record[i] ? by_record[i]->cause : "anonymize_" + masked[i].cause;
        }
        if (!cause.empty()) ++ctx.refusals;
        ++counts[row.actual_ticker];
        raw.push_back({{"record_id", rec.record_id},
                       {"actual_ticker", row.actual_ticker},
                       {"actual_quarter", rec.quarter ? json(*rec.quarter) : json(nullptr)},
                       {"actual_year", rec.year ? json(*rec.year) : json(nullptr)},
                       {"anonymized", masked[i].answer_text ? json(*masked[i].answer_text) : json(nullptr)},
                       {"predicted_ticker", row.predicted.ticker},
                       {"predicted_industry", row.predicted.industry},
                       {"predicted_quarter", row.predicted.quarter},
                       {"predicted_year", row.predicted.year},
                       {"status", std::string(gateway::to_string(row.predicted.status))},
                       {"cause", cause},
                       {"raw_reply", by_record[i] ? by_record[i]->raw_text : std::string()}});
        rows.push_back(std::move(row));
    }

    std::optional<data::IndustryMap> industry;
    if (mc.industry_map) industry = data::load_industry_map(*mc.industry_map);
    auto s = metrics::summarize_identification(rows, industry ? &*industry : nullptr);

    std::vector<std::string> header{"Firm Accuracy (%)", "Year Accuracy (%)", "Quarter and Year Accuracy (%)",
                                    "Mean Years Difference", "Mean Absolute Years Difference"};
    std::vector<std::string> cells{cell(s.firm_accuracy), cell(s.year_accuracy), cell(s.quarter_year_accuracy),
                                   cell(s.mean_years_diff), cell(s.mean_abs_years_diff)};
    if (industry) {
        header.insert(header.end(), {"FF5 Industry Accuracy (%)", "FF10 Industry Accuracy (%)"});
        cells.insert(cells.end(), {cell(s.ff5_accuracy), cell(s.ff10_accuracy)});
    } else {
        header.push_back("Industry Accuracy (%)");
        cells.push_back(cell(s.industry_accuracy));
    }
    header.insert(header.end(), {"Num Obs", "Malformed"});
    cells.insert(cells.end(), {cell(s.num_obs), cell(s.malformed)});
    Table ident{header, {}};
    ident.add(cells);

    std::vector<std::pair<std::string, std::size_t>> panel(counts.begin(), counts.end());
    auto b = metrics::baseline_rates(panel, mc.fixed_ticker);
    Table base{{"Random (%)", "Most News (%)", "Most News Ticker", "Fixed Ticker", "Fixed (%)", "Num Unique Firms"}, {}};
    base.add({pct(b.random), pct(b.most_news), b.most_news_ticker, mc.fixed_ticker, pct(b.fixed),
              cell(b.num_unique_firms)});

    const double eps = mc.epsilon.value_or(metrics::default_epsilon(b.random));
    const double skill = mc.skill.value_or(s.firm_accuracy);
    const double skill_baseline = mc.skill_baseline.value_or(b.random);
    const std::size_t n = mc.skill_n.value_or(rows.size());
    auto v = metrics::masking_validity(s.firm_accuracy, eps, skill, skill_baseline, n, mc.alpha);
    Table validity{{"Reconstruction (%)", "Epsilon (%)", "Future Invariance Refuted", "Skill (%)", "Baseline (%)",
                    "Num Obs", "Skill p-value", "Detectable Skill"},
                   {}};
    validity.add({pct(s.firm_accuracy), pct(eps), v.future_invariance_refuted ? "yes" : "no", pct(skill),
                  pct(skill_baseline), cell(n), csv::fixed(v.skill_p_value, 6), v.detectable_skill ? "yes" : "no"});

    ctx.out.table("mask_identification", ident);
    ctx.out.table("mask_baselines", base);
    ctx.out.table("mask_validity", validity);
    ctx.out.rows("mask", raw);
    ctx.out.heading("Masking and reconstruction");
    ctx.out.markdown(ident);
    ctx.out.heading("Baselines", 3);
    ctx.out.markdown(base);
    ctx.out.heading("Validity", 3);
    ctx.out.markdown(validity);
    ctx.out.paragraph(v.note);
}

// ---- embed ----

std::string read_binary(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

probe::Matrix to_matrix(const gateway::EmbeddingMatrix& m) { return probe::Matrix(m.rows, m.dim, m.values); }

void run_embed(Context& ctx) {
    if (!ctx.cfg.embed) throw ConfigError("config has no 'embed' section");
    const auto& ec = *ctx.cfg.embed;
    auto pc = ec.probe;
    pc.seed = *ctx.cfg.seed;
    ctx.out.heading("Embedding probes");
    ctx.out.paragraph("Ridge lambda " + csv::fixed(pc.lambda, 4) + ", " + std::string(probe::to_string(pc.scheme)) +
                      " scheme, SMA window " + std::to_string(ec.benchmark_window) + ".");

    for (const auto& target : ec.targets) {
        auto series = ctx.load(target.series);
        const auto& spec = series.spec();
        std::vector<std::string> var_text, date_text, value_text;
        std::vector<double> y;
        for (const auto& o : series.observations()) {
            var_text.push_back(prompt::render_embed_probe(target.variable, o.date, spec.frequency, true, ctx.render));
            date_text.push_back(prompt::render_embed_probe(target.variable, o.date, spec.frequency, false, ctx.render));
            value_text.push_back(var_text.back() + " " + data::format_value(o.value, spec.display));
            y.push_back(o.value);
        }
        auto e_var = ctx.gw().embed(var_text);
        auto e_date = ctx.gw().embed(date_text);
        auto e_value = ctx.gw().embed(value_text);
        for (const auto& [suffix, m] :
             {std::pair<std::string, const gateway::EmbeddingMatrix*>{"variable", &e_var}, {"date", &e_date},
              {"value", &e_value}}) {
            const std::string rel = "embeddings/" + file_stem(target.series) + "_" + suffix + ".bin";
            gateway::save_embeddings(*m, ctx.out.out_dir() / rel);
            ctx.out.file(rel, read_binary(ctx.out.out_dir() / rel));
            ctx.out.file(rel + ".csv", read_binary(ctx.out.out_dir() / (rel + ".csv")));
        }

        auto X_var = to_matrix(e_var);
        auto X_date = to_matrix(e_date);
        auto X_value = to_matrix(e_value);
        auto placebos = probe::make_placebos(X_var, pc.seed);

        Table table{{"Series", "Embedding", "Corr (Model)", "Corr (SMA)", "Corr (Model, SMA)", "Williams t", "df",
                     "Num Obs"},
                    {}};
        std::vector<json> raw;
        const std::vector<std::pair<std::string, const probe::Matrix*>> inputs{
            {"variable", &X_var}, {"date_only", &X_date}, {"shuffled", &placebos.shuffled}, {"random", &placebos.random}};
        for (const auto& [label, X] : inputs) {
            auto r = probe::probe_report(*X, y, pc, ec.benchmark_window);
            table.add({target.series, label, cell(r.corr_model), cell(r.corr_benchmark), cell(r.corr_model_benchmark),
                       r.williams ? cell(r.williams->t) : "", r.williams ? csv::fixed(r.williams->df, 0) : "",
                       cell(r.indices.size())});
            std::vector<metrics::NumericEvalRow> model_rows, sma_rows;
            for (std::size_t k = 0; k < r.indices.size(); ++k) {
                const auto key = period_key(series[r.indices[k]].date, spec.frequency);
                model_rows.push_back({key, r.actual[k], r.model[k], std::nullopt, false, std::nullopt, ""});
                sma_rows.push_back({key, r.actual[k], r.benchmark[k], std::nullopt, false, std::nullopt, ""});
                raw.push_back({{"series", target.series},
                               {"embedding", label},
                               {"period", key},
                               {"actual", r.actual[k]},
                               {"model", r.model[k]},
                               {"sma", r.benchmark[k]}});
            }
            ctx.out.plot("embed_" + target.series + "_" + label, model_rows);
            if (label == "variable") ctx.out.plot("embed_" + target.series + "_sma", sma_rows);
            for (const auto& note : r.notes) {
                if (label == "variable") ctx.out.paragraph(note);
            }
        }

        auto cos_var = probe::cosine_report(X_value, X_var);
        auto cos_date = probe::cosine_report(X_value, X_date);
        auto diff = probe::cosine_difference_t(cos_var, cos_date);
        Table cosines{{"Series", "Comparison", "Mean Cosine", "t", "df"}, {}};
        auto tcells = [](const std::optional<stats::TStat>& t) {
            return std::pair<std::string, std::string>{t ? cell(t->t) : "", t ? csv::fixed(t->df, 0) : ""};
        };
        auto [tv, dv] = tcells(cos_var.t_vs_zero);
        cosines.add({target.series, "value vs variable", cell(cos_var.mean), tv, dv});
        auto [td, dd] = tcells(cos_date.t_vs_zero);
        cosines.add({target.series, "value vs date only", cell(cos_date.mean), td, dd});
        auto [tx, dx] = tcells(diff);
        cosines.add({target.series, "difference", cell(cos_var.mean - cos_date.mean), tx, dx});

        ctx.out.table("embed_" + target.series, table);
        ctx.out.table("embed_cosine_" + target.series, cosines);
        ctx.out.rows("embed_" + target.series, raw);
        ctx.out.heading("Probe: " + target.series, 3);
        ctx.out.markdown(table);
        ctx.out.markdown(cosines);
    }
}

// ---- power ----

void run_power(Context& ctx) {
    PowerConfig pc = ctx.cfg.power.value_or(PowerConfig{});
    if (pc.deltas.empty()) pc.deltas = {0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.4, 0.5};
    if (pc.n_grid.empty()) pc.n_grid = {10, 17, 25, 50, 100, 250, 500, 1000};

    Table curve{{"Delta", "Num Obs (post)", "Accuracy (post)", "Alpha", "Power"}, {}};
    for (double d : pc.deltas) {
        const double power = stats::power_two_prop({d, pc.p_post, pc.n_post, pc.alpha});
        curve.add({csv::fixed(d, 4), cell(pc.n_post), csv::fixed(pc.p_post, 4), csv::fixed(pc.alpha, 4),
                   csv::fixed(power, 6)});
    }
    Table gaps{{"Num Obs (post)", "Accuracy (post)", "Alpha", "Target Power", "Min Detectable Gap"}, {}};
    for (auto n : pc.n_grid) {
        gaps.add({cell(n), csv::fixed(pc.p_post, 4), csv::fixed(pc.alpha, 4), csv::fixed(pc.target_power, 4),
                  csv::fixed(stats::min_detectable_gap(n, pc.p_post, pc.alpha, pc.target_power), 6)});
    }
    const double at_n = stats::min_detectable_gap(pc.n_post, pc.p_post, pc.alpha, pc.target_power);
    ctx.out.table("power_curve", curve);
    ctx.out.table("min_detectable_gap", gaps);
    ctx.out.heading("Power of the pre/post accuracy comparison");
    ctx.out.paragraph("With " + std::to_string(pc.n_post) + " post-cutoff observations at accuracy " +
                      csv::fixed(pc.p_post, 2) + ", a one-sided test at level " + csv::fixed(pc.alpha, 2) +
                      " needs an accuracy gap of " + csv::fixed(at_n, 4) + " for power " +
                      csv::fixed(pc.target_power, 2) + ".");
    ctx.out.markdown(curve);
    ctx.out.markdown(gaps);
}

// ---- theory-demo ----

void run_theory(Context& ctx) {
    TheoryConfig tc = ctx.cfg.theory.value_or(TheoryConfig{});
    theory::LabelSet labels(tc.labels);
    Table pairs{{"Observed", "Counterfactual (W*)", "Counterfactual (W†)", "Constrained (W*)", "Constrained (W†)",
                 "Equivalent", "Future Invariant (W*)", "Future Invariant (W†)"},
                {}};
    std::vector<json> raw;
    for (const auto& ys : labels.labels()) {
        for (const auto& yd : labels.labels()) {
            if (ys == yd) continue;
            auto w = theory::construct_equivalent_worlds(labels, tc.y_obs, ys, yd);
            const auto cs = theory::constrained_decision(w.star, labels, w.task_id, w.prompt_id);
            const auto cd = theory::constrained_decision(w.dagger, labels, w.task_id, w.prompt_id);
            pairs.add({tc.y_obs, theory::counterfactual_decision(w.star, labels, w.task_id),
                       theory::counterfactual_decision(w.dagger, labels, w.task_id), cs, cd, cs == cd ? "yes" : "no",
                       theory::future_invariance_check(w.star, labels, w.task_id) ? "yes" : "no",
                       theory::future_invariance_check(w.dagger, labels, w.task_id) ? "yes" : "no"});
            raw.push_back(theory::to_json(w, labels));
        }
    }
    Table ident{{"Observed", "Identified Set", "Size", "Label Set Size"}, {}};
    for (const auto& y : labels.labels()) {
        auto set = theory::identified_set(labels, y);
        std::string joined;
        for (const auto& l : set) joined += (joined.empty() ? "" : ";") + l;
        ident.add({y, joined, cell(set.size()), cell(labels.size())});
    }
    auto ft = theory::construct_finetune_worlds(labels, tc.y_obs, labels.labels()[0], labels.labels()[1]);
    std::vector<json> ft_rows{theory::to_json(ft, labels)};

    ctx.out.table("theory_pairs", pairs);
    ctx.out.table("theory_identified_set", ident);
    ctx.out.rows("theory_worlds", raw);
    ctx.out.rows("theory_finetune", ft_rows);
    ctx.out.heading("Observationally equivalent worlds");
    ctx.out.markdown(pairs);
    ctx.out.heading("Identified sets", 3);
    ctx.out.markdown(ident);
}

std::unique_ptr<gateway::Gateway> make_gateway(const AuditConfig& cfg, AuditOptions& options,
                                               const std::string& template_hash) {
    gateway::GatewayConfig g;
    g.mode = cfg.mode;
    g.provider_tag = cfg.provider.tag;
    g.chat_model = cfg.provider.chat_model;
    g.embedding_model = cfg.provider.embedding_model;
    g.cache_dir = cfg.cache_dir;
    g.template_hash = template_hash;
    g.requests_per_minute = cfg.provider.requests_per_minute;
    g.burst = cfg.provider.burst;
    g.max_retries = cfg.provider.max_retries;
    g.max_in_flight = cfg.provider.max_in_flight;
    g.max_requests = cfg.max_requests;
    g.reask_budget = cfg.reask_budget;

    std::unique_ptr<gateway::Transport> transport = std::move(options.transport);
    if (!transport && cfg.mode == gateway::Mode::live) {
        const char* key = std::getenv(cfg.provider.api_key_env.c_str());
        if (!key || !*key) throw ConfigError("environment variable " + cfg.provider.api_key_env + " is not set");
        transport = gateway::make_http_transport({cfg.provider.base_url, key, cfg.provider.timeout_seconds});
    }
    if (cfg.mode != gateway::Mode::live) transport.reset();
    auto gw = std::make_unique<gateway::Gateway>(std::move(g), std::move(transport));
    if (options.sleeper) gw->set_sleeper(options.sleeper);
    return gw;
}

}  // namespace

AuditResult run_audit(const AuditConfig& config, Subcommand subcommand, AuditOptions options) {
    std::optional<prompt::TemplateSet> templates;
    if (config.template_dir) templates = prompt::TemplateSet::with_overrides(*config.template_dir);
    const std::string template_hash = templates ? templates->override_hash() : std::string();

    BundleWriter out(options.out_dir);
    Context ctx{config, out, {}, nullptr, 0, {}};
    ctx.render.variant = config.variant;
    if (templates) ctx.render.templates = &*templates;
    const bool needs_gateway = subcommand == Subcommand::recall || subcommand == Subcommand::cutoff ||
                               subcommand == Subcommand::mask || subcommand == Subcommand::embed;
    if (needs_gateway) ctx.gateway = make_gateway(config, options, template_hash);

    out.heading("memaudit " + std::string(to_string(subcommand)), 1);
    out.paragraph("Mode: " + std::string(gateway::to_string(config.mode)) + ". Config hash: " + config.config_hash + ".");

    AuditResult result;
    try {
        switch (subcommand) {
            case Subcommand::recall: run_recall(ctx); break;
            case Subcommand::cutoff: run_cutoff(ctx); break;
            case Subcommand::mask: run_mask(ctx); break;
            case Subcommand::embed: run_embed(ctx); break;
            case Subcommand::power: run_power(ctx); break;
            case Subcommand::theory_demo: run_theory(ctx); break;
        }
    } catch (const gateway::BudgetExceeded& e) {
        result.partial = true;
        out.heading("Run stopped early");
        out.paragraph(std::string(e.what()) + ". Sections above are complete; the rest were not run.");
    }
    if (!ctx.warnings.empty()) {
        out.heading("Warnings");
        std::string list;
        for (const auto& w : ctx.warnings) list += "- " + w + "\n";
        out.paragraph(list.substr(0, list.size() - 1));
    }

    json manifest;
    manifest["toolkit"] = kToolkitName;
    manifest["version"] = kToolkitVersion;
    manifest["subcommand"] = to_string(subcommand);
    manifest["mode"] = gateway::to_string(config.mode);
    manifest["config_hash"] = config.config_hash;
    manifest["template_hash"] = template_hash;
    manifest["seed"] = config.seed ? json(*config.seed) : json(nullptr);
    manifest["partial"] = result.partial;
    manifest["refusals"] = ctx.refusals;
    manifest["cache_digests"] = ctx.gateway ? json(ctx.gateway->digests_used()) : json::array();
    if (ctx.gateway) {
        result.gateway = ctx.gateway->stats();
        manifest["gateway"] = {{"network_calls", result.gateway.network_calls},
                               {"cache_hits", result.gateway.cache_hits},
                               {"reasks", result.gateway.reasks}};
    }
    out.finish(std::move(manifest));
    result.refusals = ctx.refusals;
    return result;
}

}  // namespace memaudit::report
