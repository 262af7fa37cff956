#include "memaudit/gateway/reply.hpp"

#include "memaudit/csv.hpp"
#include "memaudit/data/text.hpp"

#include <json.hpp>

#include <cmath>
#include <regex>

namespace memaudit::gateway {

using nlohmann::json;

namespace {

std::optional<double> number_from(const json& v) {
    if (v.is_number()) {
        double d = v.get<double>();
        if (std::isfinite(d)) return d;
        return std::nullopt;
    }
    if (!v.is_string()) return std::nullopt;
    std::string s = csv::trim(v.get<std::string>());
    std::string cleaned;
    for (char c : s) {
        if (c == ',' || c == '$') continue;
        cleaned.push_back(c);
    }
    if (!cleaned.empty() && cleaned.back() == '%') cleaned.pop_back();
    if (cleaned.empty()) return std::nullopt;
    return csv::parse_double(cleaned);
}

std::optional<json> find_object(std::string_view raw) {
    auto text = extract_json_object(raw);
    if (!text) return std::nullopt;
    return json::parse(*text, nullptr, false);
}

ModelReply malformed(std::string_view raw) {
    ModelReply r;
    r.raw_text = std::string(raw);
    r.status = ParseStatus::malformed;
    r.refusal = true;
    r.cause = "malformed";
    return r;
}

void set_refusal(ModelReply& r, std::string cause) {
    r.refusal = true;
    r.status = ParseStatus::refusal;
    r.cause = std::move(cause);
}

void read_confidence(const json& obj, ModelReply& r) {
    auto it = obj.find("confidence");
    if (it == obj.end()) return;
    auto c = number_from(*it);
    if (c && *c >= 0.0 && *c <= 100.0) r.confidence = c;
}

std::optional<std::string> string_field(const json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    std::string s;
    if (it->is_string()) {
        s = csv::trim(it->get<std::string>());
    } else if (it->is_number()) {
        s = it->dump();
    } else {
        return std::nullopt;
    }
    if (s.empty()) return std::nullopt;
    return s;
}

template <class Fill>
ModelReply parse_object(std::string_view raw, Fill fill) noexcept {
    try {
        auto obj = find_object(raw);
        if (!obj || !obj->is_object()) return malformed(raw);
        ModelReply r;
        r.raw_text = std::string(raw);
        r.status = ParseStatus::ok;
        read_confidence(*obj, r);
        fill(*obj, r);
        return r;
    } catch (...) {
        return malformed(raw);
    }
}

}  // namespace

std::string_view to_string(ParseStatus s) {
    switch (s) {
        case ParseStatus::ok: return "ok";
        case ParseStatus::refusal: return "refusal";
        case ParseStatus::malformed: return "malformed";
    }
    return "malformed";
}

std::optional<std::string> extract_json_object(std::string_view raw) {
    for (std::size_t start = raw.find('{'); start != std::string_view::npos;
         start = raw.find('{', start + 1)) {
        int depth = 0;
        bool in_string = false;
        bool escaped = false;
        for (std::size_t i = start; i < raw.size(); ++i) {
            char c = raw[i];
            if (in_string) {
                if (escaped) {
                    escaped = false;
                } else if (c == '\\') {
                    escaped = true;
                } else if (c == '"') {
                    in_string = false;
                }
                continue;
            }
            if (c == '"') {
                in_string = true;
            } else if (c == '{') {
                ++depth;
            } else if (c == '}') {
                if (--depth == 0) {
                    auto candidate = raw.substr(start, i - start + 1);
                    auto parsed = json::parse(candidate, nullptr, false);
                    if (!parsed.is_discarded() && parsed.is_object()) return std::string(candidate);
                    break;
                }
            }
        }
    }
    return std::nullopt;
}

ModelReply parse_numeric_reply(std::string_view raw) noexcept {
    return parse_object(raw, [](const json& obj, ModelReply& r) {
        auto it = obj.find("answer");
        if (it == obj.end() || it->is_null()) {
            set_refusal(r, "null_answer");
            return;
        }
        r.answer_numeric = number_from(*it);
        if (!r.answer_numeric) set_refusal(r, "null_answer");
    });
}

ModelReply parse_categorical_reply(std::string_view raw) noexcept {
    return parse_object(raw, [](const json& obj, ModelReply& r) {
        r.answer_text = string_field(obj, "answer");
        if (!r.answer_text) set_refusal(r, "null_answer");
    });
}

ModelReply parse_date_reply(std::string_view raw) noexcept {
    return parse_object(raw, [](const json& obj, ModelReply& r) {
        r.date_text = string_field(obj, "answer");
        if (!r.date_text) set_refusal(r, "null_answer");
    });
}

ModelReply parse_date_and_level_reply(std::string_view raw) noexcept {
    return parse_object(raw, [](const json& obj, ModelReply& r) {
        r.date_text = string_field(obj, "date");
        auto it = obj.find("answer");
        if (it != obj.end() && !it->is_null()) r.answer_numeric = number_from(*it);
        if (!r.date_text && !r.answer_numeric) set_refusal(r, "null_answer");
    });
}

ModelReply parse_reply(std::string_view raw, prompt::AnswerSchema schema) noexcept {
    using prompt::AnswerSchema;
    switch (schema) {
        case AnswerSchema::numeric_json: return parse_numeric_reply(raw);
        case AnswerSchema::direction_json: return parse_categorical_reply(raw);
        case AnswerSchema::date_json: return parse_date_reply(raw);
        case AnswerSchema::date_and_level_json: return parse_date_and_level_reply(raw);
        case AnswerSchema::identification_line:
        case AnswerSchema::free_text:
            break;
    }
    ModelReply r;
    try {
        r.raw_text = std::string(raw);
        auto text = csv::trim(raw);
        if (text.empty()) {
            set_refusal(r, "null_answer");
        } else {
            r.answer_text = std::move(text);
            r.status = ParseStatus::ok;
        }
    } catch (...) {
        r.refusal = true;
        r.status = ParseStatus::malformed;
        r.cause = "malformed";
    }
    return r;
}

void apply_zero_rule(ModelReply& reply, bool zero_implausible) {
    if (zero_implausible && !reply.refusal && reply.answer_numeric && *reply.answer_numeric == 0.0) {
        set_refusal(reply, "zero_answer");
    }
}

IdentificationReply parse_identification_reply(std::string_view raw) noexcept {
    IdentificationReply out;
    try {
        static const std::regex re(
            R"(company\s+estimate\s*:\s*\$?\s*([A-Za-z0-9.\-]+)\s*[,;]?\s*)"
            R"(industry\s+estimate\s*:\s*(.*?)\s*[,;]?\s*)"
            R"(quarter\s+estimate\s*:\s*(?:q\s*)?([1-4])\s*[,;]?\s*)"
            R"(year\s+estimate\s*:\s*(\d{4}))",
            std::regex::icase | std::regex::ECMAScript);
        std::string text(raw);
        std::smatch m;
        if (!std::regex_search(text, m, re)) return out;
        out.ticker = data::upper(m[1].str());
        out.industry = csv::trim(m[2].str());
        out.quarter = std::stoi(m[3].str());
        out.year = std::stoi(m[4].str());
        if (out.industry.empty()) return IdentificationReply{};
        out.status = ParseStatus::ok;
    } catch (...) {
        return IdentificationReply{};
    }
    return out;
}

}  // namespace memaudit::gateway
