#pragma once

#include "memaudit/prompt/render.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace memaudit::gateway {

enum class ParseStatus { ok, refusal, malformed };

std::string_view to_string(ParseStatus s);

/// One parsed elicitation outcome.
struct ModelReply {
    std::string raw_text;
    std::optional<double> answer_numeric;
    std::optional<std::string> answer_text;
    /// In [0, 100]; out-of-range or unparsable confidences are dropped.
    std::optional<double> confidence;
    /// The "date" field of the date-and-level schema, or the answer of the
    /// date schema, as returned.
    std::optional<std::string> date_text;
    bool refusal = false;
    ParseStatus status = ParseStatus::malformed;
    /// Why the reply is a refusal: "null_answer", "zero_answer",
    /// "malformed", "cache_miss", "transport_error", "budget_exhausted".
    std::string cause;

    bool operator==(const ModelReply&) const = default;
};

/// First balanced `{...}` in `raw` that parses as a JSON object, after
/// skipping prose and code fences. Empty when there is none.
std::optional<std::string> extract_json_object(std::string_view raw);

/// `{"answer": <number>, "confidence": <number>}`. Numeric strings such as
/// "2,834.40" or "3.5%" are accepted. A null, missing or non-numeric answer
/// is a refusal; text without a JSON object is malformed (and a refusal).
ModelReply parse_numeric_reply(std::string_view raw) noexcept;

/// String answer ("up"/"down" or a series name).
ModelReply parse_categorical_reply(std::string_view raw) noexcept;

/// `answer` is a "mm/dd/yyyy" date, kept as text in `date_text`.
ModelReply parse_date_reply(std::string_view raw) noexcept;

/// `date` plus a numeric `answer`.
ModelReply parse_date_and_level_reply(std::string_view raw) noexcept;

/// Dispatch on the bundle's answer schema. Identification lines and free
/// text are returned trimmed in `answer_text`; an empty reply is a refusal.
ModelReply parse_reply(std::string_view raw, prompt::AnswerSchema schema) noexcept;

/// Withheld-prediction rule for numeric answers: exactly 0 counts as a
/// refusal when the series marks 0 as implausible.
void apply_zero_rule(ModelReply& reply, bool zero_implausible);

struct IdentificationReply {
    std::string ticker;  // upper-cased
    std::string industry;
    int quarter = 0;
    int year = 0;
    ParseStatus status = ParseStatus::malformed;

    bool operator==(const IdentificationReply&) const = default;
};

/// "Company Estimate: TIK, Industry Estimate: X, Quarter Estimate: Q,
/// Year Estimate: Y", case-insensitive and tolerant of extra whitespace. The
/// quarter may be written "Q1" or "1". Missing fields give `malformed`.
IdentificationReply parse_identification_reply(std::string_view raw) noexcept;

}  // namespace memaudit::gateway
