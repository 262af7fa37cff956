#include "memaudit/prompt/templates.hpp"

#include "memaudit/error.hpp"
#include "memaudit/gateway/digest.hpp"

#include <fstream>
#include <sstream>

namespace memaudit::prompt {

namespace {

constexpr std::string_view kConfidenceField =
    "- confidence: A number between 0 and 100 indicating your confidence in the answer.";

std::string numeric_instruction(bool percent) {
    std::string pct = percent ? " in percentage format" : "";
    return "Provide a precise numerical answer" + pct +
           ". Indicate your level of confidence. Format as a JSON object with the following fields:\n"
           "- answer: The precise numerical answer" + pct + " to the question. No strings.\n" +
           std::string(kConfidenceField);
}

constexpr std::string_view kAnonymize =
    "Your role is to ANONYMIZE all text that is provided by the user. After you have anonymized a "
    "text, NOBODY, not even an expert financial analyst, should be able to read the text and know "
    "the identity of the company nor the industry the company operates in.\n"
    "\n"
    "For example, if the text is: The country's largest phone producer Apple had great phone "
    "related earnings but Google did not in 2024 likely because of Apple's slogan Think Different, "
    "then you should ANONYMIZE it to:\n"
    "\n"
    "The country's largest product_type_1 producer Company_1 had great product_type_1 related "
    "earnings but Company_2 did not in time_1 likely because of Company_1's slogan slogan_1.\n"
    "\n"
    "You should also ANONYMIZE any other information which one could use to identify the company "
    "or make an educated guess at its identity. Stock tickers are identifiers and are usually four "
    "capitalized letters or less (consider TIK as a stand-in for an arbitrary ticker) and are "
    "sometimes referenced in the text in the following formats: SYMBOL:TIK, TIK, >TIK, $TIK, "
    "$ TIK, SYMBOL TIK, SYMBOL: TIK, $> TIK.\n"
    "\n"
    "Make sure you censor TIK to ticker_x, and any other identifiers related to companies. This "
    "includes the names of individuals, locations, industries, sectors, product names and types, "
    "generic product lines, services, times, years, dates, and all numbers and percentages in the "
    "text including units. These should be replaced with: name_x, location_x, industry_x, "
    "sector_x, product_x, product_type_x, product_line_x, service_x, time_x, year_x, date_x, and "
    "number_a, number_b, number_c, respectively.\n"
    "\n"
    "Also replace any website or internet links with link_x. Anonymize all location references, "
    "including cities, countries, regions, and other geographical indicators, as location_x. "
    "Replace all references to specific industries, sectors, and markets with industry_x, "
    "sector_x, or market_x, respectively. Replace all references to dates, times, years, "
    "quarters, months, or any other temporal markers with date_x, time_x, year_x, or quarter_x.\n"
    "\n"
    "Replace all numeric references, including numbers, percentages, financial figures, units of "
    "measurement, ratios, revenues, margins, forecasts, and any other numeric value with "
    "anonymized markers (e.g., number_a, number_b, number_c). Replace all domain names and URLs "
    "with link_x (e.g., \"ToysRUs.com\" to \"link_x\"). Replace all references to specific "
    "services, stores, or platforms with service_x (e.g., \"Amazon Prime\" to \"service_x\").\n"
    "\n"
    "You should never just delete an identifier; instead, always replace it with an anonymous "
    "analog. After you read and ANONYMIZE the text, you should output the anonymized text and "
    "nothing else.\n"
    "\n"
    "{text}";

constexpr std::string_view kIdentify =
    "You will receive a body of text which has been anonymized. You are omniscient. Use all your "
    "knowledge and the context to identify which company and industry the text is about, as well "
    "as the quarter and year it was written. Make your best guess based on information and "
    "context if you are unsure. Please only provide the ticker of the company you have "
    "identified. Provide your estimate exactly in the following format, with no other text at "
    "all (TIK is your estimate of the ticker, Industry Name is your estimate of the industry, Q "
    "is your estimate of the quarter, Y is your estimate of the year): Company Estimate: TIK, "
    "Industry Estimate: Industry Name, Quarter Estimate: Q, Year Estimate: Y\n"
    "\n"
    "{text}";

std::map<std::string, std::string, std::less<>> builtin_templates() {
    const std::string recollection =
        "You're a helpful assistant who always tries to answer to the best of your recollection of facts.";
    std::map<std::string, std::string, std::less<>> t;
    t["system.default"] = recollection;
    t["system.post_cutoff"] = recollection +
                              " Your knowledge cutoff date is December 31st, 2025. Your training data "
                              "covers up to December 31st, 2025.";
    t["system.fake_cutoff"] = recollection + " Knowledge cutoff: {fake_cutoff} Current date: {current_date}.";
    t["system.fake_cutoff_no_current"] = recollection + " Knowledge cutoff: {fake_cutoff}.";
    t["user.fake_cutoff"] = "For the following tasks, please restrict your knowledge pool to {cutoff_phrase}.";
    t["user.rolling_cutoff"] = "Do not use any knowledge after time {previous_day}.";

    t["context.closing_price"] = "Context: The closing price of {data_name} was {price_list}.";

    t["question.closing_value"] = "What was the {data_name} closing value on {date}? Provide your best estimate.";
    t["question.forecast_closing_value"] =
        "Can you forecast the {data_name} closing value on {date}? You must provide your best "
        "numerical estimate even if you cannot predict perfectly. Do not output explanations of "
        "your capabilities.";
    t["question.monthly_value"] = "What was the {data_name} in {month}, {year}? Provide your best estimate.";
    t["question.quarterly_value"] = "What was the {data_name} in {quarter} {year}? Provide your best estimate.";
    t["question.end_of_month_value"] = "What was the {data_name} on {date}? Provide your best estimate.";
    t["question.closing_price"] = "What was the closing price of {data_name} on {date}? Provide your best estimate.";
    t["question.direction"] =
        "Was the {data_name} up or down for the month of {month}, {year}? Provide your best estimate.";
    t["question.pct_change"] =
        "By what percentage did the {data_name} change for the month of {month}, {year}? Provide your best estimate.";
    t["question.relative"] = "Which performed better in {year}: {data_name} or {data_name2}? Provide your best estimate.";
    t["question.headline_date"] = "What is the date of these headlines? Provide your best estimate.";
    t["question.headline_level"] =
        "First, infer the date of these headlines. What was the closing value of the {data_name} "
        "for the next trading day? Provide your best estimate.";

    t["instruction.numeric"] = numeric_instruction(false);
    t["instruction.numeric_percent"] = numeric_instruction(true);
    t["instruction.direction"] =
        "Provide an answer that is either \"up\" or \"down\". Indicate your level of confidence. "
        "Format as a JSON object with the following fields:\n"
        "- answer: An answer to the question that is either \"up\" or \"down\".\n" +
        std::string(kConfidenceField);
    t["instruction.relative"] =
        "Provide an answer that is either {data_name} or {data_name2}. Indicate your level of "
        "confidence. Format as a JSON object with the following fields:\n"
        "- answer: An answer to the question that is either {data_name} or {data_name2}.\n" +
        std::string(kConfidenceField);
    t["instruction.date"] =
        "Provide a precise date. Indicate your level of confidence. Format as a JSON object with "
        "the following fields:\n"
        "- answer: The precise date in the format \"mm/dd/yyyy\".\n" +
        std::string(kConfidenceField);
    t["instruction.date_and_level"] =
        "You must provide a precise numerical answer. Indicate your level of confidence. Format as "
        "a JSON object with the following fields:\n"
        "- date: The date of the headlines in the format \"mm/dd/yyyy\".\n"
        "- answer: The precise numerical answer to the question. No strings.\n" +
        std::string(kConfidenceField);
    t["instruction.strict_numeric_suffix"] =
        "You must provide a numerical answer even if you are unable to verify the information. Do "
        "not output any additional text.";

    t["headline.context"] = "Here are headlines from the Wall Street Journal written on the same day:\n{headlines}";

    t["mask.anonymize"] = std::string(kAnonymize);
    t["mask.identify"] = std::string(kIdentify);
    t["econ_logic"] =
        "How should the firm be impacted by the following headline?\n"
        "In your explanation, do not include specifics. Only provide the economic logic using "
        "three sentences.\n"
        "\n"
        "{headline}";

    t["probe.with_variable"] = "{when}, the {variable} was";
    t["probe.date_only"] = "{when}, the value was";
    return t;
}

}  // namespace

std::string substitute(std::string_view text, const Vars& vars) {
    std::string out;
    out.reserve(text.size() + 64);
    std::size_t i = 0;
    while (i < text.size()) {
        char c = text[i];
        if (c == '{') {
            auto close = text.find('}', i + 1);
            if (close != std::string_view::npos) {
                auto name = text.substr(i + 1, close - i - 1);
                bool identifier = !name.empty() && name.find_first_not_of(
                                                       "abcdefghijklmnopqrstuvwxyz0123456789_") ==
                                                       std::string_view::npos;
                if (identifier) {
                    auto it = vars.find(name);
                    if (it == vars.end()) {
                        throw PreconditionError("no value for template placeholder {" + std::string(name) + "}");
                    }
                    out += it->second;
                    i = close + 1;
                    continue;
                }
            }
        }
        out.push_back(c);
        ++i;
    }
    return out;
}

const TemplateSet& TemplateSet::defaults() {
    static const TemplateSet set = [] {
        TemplateSet s;
        s.templates_ = builtin_templates();
        return s;
    }();
    return set;
}

TemplateSet TemplateSet::with_overrides(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) {
        throw DataError("template override directory not found: '" + dir.string() + "'");
    }
    TemplateSet s = defaults();
    std::map<std::string, std::string> overridden;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
        std::string key = entry.path().stem().string();
        if (!s.templates_.count(key)) {
            throw DataError("unknown template override '" + entry.path().filename().string() + "'");
        }
        std::ifstream in(entry.path(), std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        std::string text = buf.str();
        if (!text.empty() && text.back() == '\n') text.pop_back();
        if (!text.empty() && text.back() == '\r') text.pop_back();
        s.templates_[key] = text;
        overridden[key] = text;
    }
    if (!overridden.empty()) {
        std::string material;
        for (const auto& [k, v] : overridden) {
            material += k;
            material.push_back('\0');
            material += v;
            material.push_back('\0');
        }
        s.override_hash_ = gateway::sha256_hex(material);
    }
    return s;
}

const std::string& TemplateSet::get(std::string_view key) const {
    auto it = templates_.find(key);
    if (it == templates_.end()) throw PreconditionError("unknown template '" + std::string(key) + "'");
    return it->second;
}

std::string TemplateSet::render(std::string_view key, const Vars& vars) const {
    return substitute(get(key), vars);
}

std::vector<std::string> TemplateSet::keys() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : templates_) out.push_back(k);
    return out;
}

}  // namespace memaudit::prompt
