#pragma once

#include "memaudit/calendar.hpp"
#include "memaudit/data/series.hpp"
#include "memaudit/data/text.hpp"
#include "memaudit/prompt/templates.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace memaudit::prompt {

enum class AnswerSchema {
    numeric_json,
    direction_json,
    date_json,
    date_and_level_json,
    identification_line,
    free_text,
};

std::string_view to_string(AnswerSchema s);
AnswerSchema parse_answer_schema(std::string_view text);

/// One elicitation: the exact messages sent and the reply format expected.
struct PromptBundle {
    std::string system_message;  // empty means "no system message"
    std::string user_message;
    AnswerSchema answer_schema = AnswerSchema::numeric_json;
    std::string task_tag;

    bool operator==(const PromptBundle&) const = default;
};

enum class CutoffMode { none, both, system_only, user_only, rolling };

std::string_view to_string(CutoffMode m);
CutoffMode parse_cutoff_mode(std::string_view text);

struct CutoffDirective {
    CutoffMode mode = CutoffMode::none;
    /// Required for both/system_only/user_only.
    std::optional<Date> fake_cutoff;
    /// Rendered as "Current date: ..." in the fake-cutoff system message.
    std::optional<Date> current_date;
    /// The model's real training cutoff. Queries on or after it get the
    /// extended post-cutoff system message.
    std::optional<Date> model_cutoff;
};

enum class PromptVariant {
    standard,
    /// Appends the "must provide a numerical answer" suffix used for models
    /// that tend to refuse.
    strict_numeric,
};

struct RenderOptions {
    PromptVariant variant = PromptVariant::standard;
    const TemplateSet* templates = nullptr;  // defaults when null

    const TemplateSet& set() const { return templates ? *templates : TemplateSet::defaults(); }
};

/// Numeric recall question for one period of a series, with an optional
/// context block (`context` most recent last). Throws PreconditionError when
/// the series' question style cannot be asked at its frequency.
PromptBundle render_recall(const data::SeriesSpec& spec, Date period,
                           std::span<const data::Observation> context,
                           const CutoffDirective& directive, const RenderOptions& opts = {});

enum class CategoricalKind { direction, pct_change, relative };

/// Monthly direction / monthly percentage change (one name) or annual
/// relative performance (two names).
PromptBundle render_direction_relative(CategoricalKind kind, std::span<const std::string> names,
                                       Date period, const RenderOptions& opts = {});

/// Same-day headline block; never renders the record dates. `want_level`
/// asks additionally for the next trading day's index level.
PromptBundle render_headline(std::span<const data::TextRecord> records, bool want_level,
                             const std::string& data_name = "S&P 500", const RenderOptions& opts = {});

struct MaskingPair {
    PromptBundle anonymize;
    /// Identification prompt whose user message contains `kAnonymizedHole`.
    PromptBundle identify_template;
};

inline constexpr std::string_view kAnonymizedHole = "{anonymized_text}";

MaskingPair render_masking_pair(const std::string& body, const RenderOptions& opts = {});

/// Replace the hole in an identification template with the anonymized text.
PromptBundle fill_identification(const PromptBundle& identify_template, const std::string& anonymized);

PromptBundle render_econ_logic(const std::string& headline, const RenderOptions& opts = {});

/// Probe sentence ending just before the value, e.g. "In Q4 2020, the
/// earliest estimate of the US GDP growth rate was". Without the variable
/// the sentence names only the period.
std::string render_embed_probe(const std::string& variable_phrase, Date period, Frequency frequency,
                               bool include_variable, const RenderOptions& opts = {});

/// Rewrite the system/user messages for a cutoff directive. `query_date` is
/// the period being asked about; rolling mode requires it. The answer schema
/// and task tag are never touched.
PromptBundle apply_cutoff_directive(PromptBundle bundle, const CutoffDirective& directive,
                                    std::optional<Date> query_date, const RenderOptions& opts = {});

}  // namespace memaudit::prompt
