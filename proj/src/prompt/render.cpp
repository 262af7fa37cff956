#include "memaudit/prompt/render.hpp"

#include "memaudit/csv.hpp"
#include "memaudit/error.hpp"

#include <set>

namespace memaudit::prompt {

namespace {

using data::QuestionStyle;

std::string join_blocks(std::initializer_list<std::string> blocks) {
    std::string out;
    for (const auto& b : blocks) {
        if (b.empty()) continue;
        if (!out.empty()) out += "\n\n";
        out += b;
    }
    return out;
}

std::string quarter_label(Date d) { return "Q" + std::to_string(quarter_of(d)); }

/// How a period is written inside a question or context block.
std::string period_label(const data::SeriesSpec& spec, Date d) {
    switch (spec.question) {
        case QuestionStyle::end_of_month_value:
            return long_date(end_of_month(d));
        case QuestionStyle::closing_price:
            return long_date(spec.frequency == Frequency::monthly ? end_of_month(d) : d);
        case QuestionStyle::period_value:
            if (spec.frequency == Frequency::quarterly) {
                return quarter_label(d) + " " + std::to_string(year_of(d));
            }
            if (spec.frequency == Frequency::monthly) {
                return std::string(month_name(month_of(d))) + ", " + std::to_string(year_of(d));
            }
            return long_date(d);
        default:
            return long_date(d);
    }
}

std::string price_list(const data::SeriesSpec& spec, std::span<const data::Observation> context) {
    // Most recent first: "A on d1 and B on d2", "A on d1, B on d2 and C on d3".
    std::vector<std::string> items;
    for (auto it = context.rbegin(); it != context.rend(); ++it) {
        items.push_back(data::format_value(it->value, spec.display) + " on " + period_label(spec, it->date));
    }
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i > 0) out += (i + 1 == items.size()) ? " and " : ", ";
        out += items[i];
    }
    return out;
}

void require_frequency(bool ok, const data::SeriesSpec& spec) {
    if (!ok) {
        throw PreconditionError("question style '" + std::string(data::to_string(spec.question)) +
                                "' is not supported for " + std::string(to_string(spec.frequency)) +
                                " series '" + spec.name + "'");
    }
}

std::string cutoff_phrase(Date cutoff) {
    if (month_of(cutoff) == 12 && day_of(cutoff) == 31) {
        return "the end of " + std::to_string(year_of(cutoff));
    }
    return ordinal_date(cutoff);
}

bool on_or_after(Date a, Date b) {
    return std::chrono::sys_days{a} >= std::chrono::sys_days{b};
}

}  // namespace

std::string_view to_string(AnswerSchema s) {
    switch (s) {
        case AnswerSchema::numeric_json: return "numeric_json";
        case AnswerSchema::direction_json: return "direction_json";
        case AnswerSchema::date_json: return "date_json";
        case AnswerSchema::date_and_level_json: return "date_and_level_json";
        case AnswerSchema::identification_line: return "identification_line";
        case AnswerSchema::free_text: return "free_text";
    }
    return "free_text";
}

AnswerSchema parse_answer_schema(std::string_view text) {
    for (auto s : {AnswerSchema::numeric_json, AnswerSchema::direction_json, AnswerSchema::date_json,
                   AnswerSchema::date_and_level_json, AnswerSchema::identification_line,
                   AnswerSchema::free_text}) {
        if (to_string(s) == text) return s;
    }
    throw DataError("unknown answer schema '" + std::string(text) + "'");
}

std::string_view to_string(CutoffMode m) {
    switch (m) {
        case CutoffMode::none: return "none";
        case CutoffMode::both: return "both";
        case CutoffMode::system_only: return "system_only";
        case CutoffMode::user_only: return "user_only";
        case CutoffMode::rolling: return "rolling";
    }
    return "none";
}

CutoffMode parse_cutoff_mode(std::string_view text) {
    for (auto m : {CutoffMode::none, CutoffMode::both, CutoffMode::system_only, CutoffMode::user_only,
                   CutoffMode::rolling}) {
        if (to_string(m) == text) return m;
    }
    throw DataError("unknown cutoff mode '" + std::string(text) + "'");
}

PromptBundle render_recall(const data::SeriesSpec& spec, Date period,
                           std::span<const data::Observation> context,
                           const CutoffDirective& directive, const RenderOptions& opts) {
    const auto& t = opts.set();
    Vars vars{{"data_name", spec.name}};
    std::string question;
    switch (spec.question) {
        case QuestionStyle::closing_value:
        case QuestionStyle::forecast_closing_value:
            require_frequency(spec.frequency == Frequency::daily, spec);
            vars["date"] = long_date(period);
            question = t.render(spec.question == QuestionStyle::closing_value
                                    ? "question.closing_value"
                                    : "question.forecast_closing_value",
                                vars);
            break;
        case QuestionStyle::period_value:
            require_frequency(spec.frequency != Frequency::daily, spec);
            vars["year"] = std::to_string(year_of(period));
            if (spec.frequency == Frequency::monthly) {
                vars["month"] = std::string(month_name(month_of(period)));
                question = t.render("question.monthly_value", vars);
            } else {
                vars["quarter"] = quarter_label(period);
                question = t.render("question.quarterly_value", vars);
            }
            break;
        case QuestionStyle::end_of_month_value:
            require_frequency(spec.frequency != Frequency::quarterly, spec);
            vars["date"] = period_label(spec, period);
            question = t.render("question.end_of_month_value", vars);
            break;
        case QuestionStyle::closing_price:
            require_frequency(spec.frequency != Frequency::quarterly, spec);
            vars["date"] = period_label(spec, period);
            question = t.render("question.closing_price", vars);
            break;
    }

    std::string context_block;
    if (!context.empty()) {
        context_block = t.render("context.closing_price",
                                 {{"data_name", spec.name}, {"price_list", price_list(spec, context)}});
    }
    std::string instruction = t.get(spec.kind == data::SeriesKind::rate ? "instruction.numeric_percent"
                                                                         : "instruction.numeric");
    std::string suffix =
        opts.variant == PromptVariant::strict_numeric ? t.get("instruction.strict_numeric_suffix") : "";

    PromptBundle bundle;
    bundle.system_message = t.get("system.default");
    bundle.user_message = join_blocks({context_block, question, instruction, suffix});
    bundle.answer_schema = AnswerSchema::numeric_json;
    bundle.task_tag = "recall." + std::string(data::to_string(spec.question));
    return apply_cutoff_directive(std::move(bundle), directive, period, opts);
}

PromptBundle render_direction_relative(CategoricalKind kind, std::span<const std::string> names,
                                       Date period, const RenderOptions& opts) {
    const auto& t = opts.set();
    const std::size_t want = kind == CategoricalKind::relative ? 2 : 1;
    if (names.size() != want) {
        throw PreconditionError("render_direction_relative: expected " + std::to_string(want) +
                                " series name(s), got " + std::to_string(names.size()));
    }
    Vars vars{{"data_name", names[0]},
              {"month", std::string(month_name(month_of(period)))},
              {"year", std::to_string(year_of(period))}};
    PromptBundle bundle;
    bundle.system_message = t.get("system.default");
    switch (kind) {
        case CategoricalKind::direction:
            bundle.user_message =
                join_blocks({t.render("question.direction", vars), t.get("instruction.direction")});
            bundle.answer_schema = AnswerSchema::direction_json;
            bundle.task_tag = "direction";
            break;
        case CategoricalKind::pct_change:
            bundle.user_message =
                join_blocks({t.render("question.pct_change", vars), t.get("instruction.numeric")});
            bundle.answer_schema = AnswerSchema::numeric_json;
            bundle.task_tag = "pct_change";
            break;
        case CategoricalKind::relative:
            vars["data_name2"] = names[1];
            bundle.user_message = join_blocks(
                {t.render("question.relative", vars), t.render("instruction.relative", vars)});
            bundle.answer_schema = AnswerSchema::direction_json;
            bundle.task_tag = "relative";
            break;
    }
    return bundle;
}

PromptBundle render_headline(std::span<const data::TextRecord> records, bool want_level,
                             const std::string& data_name, const RenderOptions& opts) {
    if (records.empty()) throw PreconditionError("render_headline: no records");
    for (const auto& r : records) {
        if (r.date != records.front().date) {
            throw PreconditionError("render_headline: records span more than one date");
        }
    }
    const auto& t = opts.set();
    std::string lines;
    for (const auto& r : records) {
        if (!lines.empty()) lines += '\n';
        lines += r.title ? *r.title + ": " + r.body : r.body;
    }
    std::string context = t.render("headline.context", {{"headlines", lines}});
    PromptBundle bundle;
    bundle.system_message = t.get("system.default");
    if (want_level) {
        bundle.user_message = join_blocks({context, t.render("question.headline_level", {{"data_name", data_name}}),
                                           t.get("instruction.date_and_level")});
        bundle.answer_schema = AnswerSchema::date_and_level_json;
        bundle.task_tag = "headline.date_level";
    } else {
        bundle.user_message =
            join_blocks({context, t.get("question.headline_date"), t.get("instruction.date")});
        bundle.answer_schema = AnswerSchema::date_json;
        bundle.task_tag = "headline.date";
    }
    return bundle;
}

MaskingPair render_masking_pair(const std::string& body, const RenderOptions& opts) {
    if (csv::trim(body).empty()) throw PreconditionError("render_masking_pair: empty body");
    const auto& t = opts.set();
    MaskingPair pair;
    pair.anonymize.user_message = t.render("mask.anonymize", {{"text", body}});
    pair.anonymize.answer_schema = AnswerSchema::free_text;
    pair.anonymize.task_tag = "mask.anonymize";
    pair.identify_template.user_message = t.render("mask.identify", {{"text", std::string(kAnonymizedHole)}});
    pair.identify_template.answer_schema = AnswerSchema::identification_line;
    pair.identify_template.task_tag = "mask.identify";
    return pair;
}

PromptBundle fill_identification(const PromptBundle& identify_template, const std::string& anonymized) {
    PromptBundle out = identify_template;
    auto pos = out.user_message.rfind(kAnonymizedHole);
    if (pos == std::string::npos) throw PreconditionError("fill_identification: template has no hole");
    out.user_message.replace(pos, kAnonymizedHole.size(), anonymized);
    return out;
}

PromptBundle render_econ_logic(const std::string& headline, const RenderOptions& opts) {
    if (csv::trim(headline).empty()) throw PreconditionError("render_econ_logic: empty headline");
    PromptBundle bundle;
    bundle.user_message = opts.set().render("econ_logic", {{"headline", headline}});
    bundle.answer_schema = AnswerSchema::free_text;
    bundle.task_tag = "econ_logic";
    return bundle;
}

std::string render_embed_probe(const std::string& variable_phrase, Date period, Frequency frequency,
                               bool include_variable, const RenderOptions& opts) {
    if (!period.ok()) throw PreconditionError("render_embed_probe: invalid period");
    std::string when;
    switch (frequency) {
        case Frequency::quarterly:
            when = "In " + quarter_label(period) + " " + std::to_string(year_of(period));
            break;
        case Frequency::monthly:
            when = "In " + std::string(month_name(month_of(period))) + " " + std::to_string(year_of(period));
            break;
        case Frequency::daily:
            when = "On " + long_date(period);
            break;
    }
    const auto& t = opts.set();
    if (include_variable) return t.render("probe.with_variable", {{"when", when}, {"variable", variable_phrase}});
    return t.render("probe.date_only", {{"when", when}});
}

PromptBundle apply_cutoff_directive(PromptBundle bundle, const CutoffDirective& directive,
                                    std::optional<Date> query_date, const RenderOptions& opts) {
    const auto& t = opts.set();
    const bool post_real_cutoff =
        query_date && directive.model_cutoff && on_or_after(*query_date, *directive.model_cutoff);
    const std::string recall_system = t.get(post_real_cutoff ? "system.post_cutoff" : "system.default");

    auto fake_system = [&] {
        Vars v{{"fake_cutoff", ordinal_date(*directive.fake_cutoff)}};
        if (directive.current_date) {
            v["current_date"] = ordinal_date(*directive.current_date);
            return t.render("system.fake_cutoff", v);
        }
        return t.render("system.fake_cutoff_no_current", v);
    };
    auto restrict_user = [&] {
        bundle.user_message = t.render("user.fake_cutoff", {{"cutoff_phrase", cutoff_phrase(*directive.fake_cutoff)}}) +
                              "\n" + bundle.user_message;
    };
    const bool needs_fake = directive.mode == CutoffMode::both || directive.mode == CutoffMode::system_only ||
                            directive.mode == CutoffMode::user_only;
    if (needs_fake && !directive.fake_cutoff) {
        throw PreconditionError("cutoff mode '" + std::string(to_string(directive.mode)) +
                                "' requires a fake cutoff date");
    }

    switch (directive.mode) {
        case CutoffMode::none:
            bundle.system_message = recall_system;
            break;
        case CutoffMode::both:
            bundle.system_message = fake_system();
            restrict_user();
            break;
        case CutoffMode::system_only:
            bundle.system_message = fake_system();
            break;
        case CutoffMode::user_only:
            bundle.system_message = recall_system;
            restrict_user();
            break;
        case CutoffMode::rolling:
            if (!query_date) throw PreconditionError("rolling cutoff requires the queried date");
            bundle.system_message = recall_system;
            bundle.user_message =
                t.render("user.rolling_cutoff", {{"previous_day", ordinal_date(previous_day(*query_date))}}) +
                "\n" + bundle.user_message;
            break;
    }
    return bundle;
}

}  // namespace memaudit::prompt
