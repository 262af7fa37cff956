#include "support.hpp"

#include "memaudit/gateway/digest.hpp"
#include "memaudit/report/audit.hpp"
#include "memaudit/report/config.hpp"

#include <cmath>
#include <fstream>
#include <regex>
#include <random>
#include <sstream>

namespace memaudit::testing {

using nlohmann::json;

TempDir::TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("memaudit_" + tag + "_" + std::to_string(rd()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

void write_text(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << content;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json chat_response(const std::string& content) {
    return {{"choices", json::array({{{"index", 0}, {"message", {{"role", "assistant"}, {"content", content}}}}})}};
}

std::string user_message(const json& body) {
    for (const auto& m : body.at("messages")) {
        if (m.at("role") == "user") return m.at("content").get<std::string>();
    }
    return {};
}

std::vector<double> hash_embedding(const std::string& text, std::size_t dim) {
    const auto hex = gateway::sha256_hex(text);
    std::mt19937_64 rng(std::stoull(hex.substr(0, 16), nullptr, 16));
    std::vector<double> v(dim);
    for (auto& x : v) x = static_cast<double>(rng() % 2001) / 1000.0 - 1.0;
    return v;
}

json embedding_response(const json& body, std::size_t dim) {
    json data = json::array();
    const auto& inputs = body.at("input");
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        data.push_back({{"index", i}, {"embedding", hash_embedding(inputs[i].get<std::string>(), dim)}});
    }
    return {{"data", data}};
}

namespace {

using std::chrono::day;
using std::chrono::month;
using std::chrono::year;

Date ymd(int y, unsigned m, unsigned d) { return Date{year{y}, month{m}, day{d}}; }

data::SeriesSpec spec(std::string name, data::SeriesKind kind, Frequency f, data::QuestionStyle q) {
    data::SeriesSpec s;
    s.name = std::move(name);
    s.kind = kind;
    s.frequency = f;
    s.question = q;
    return s;
}

}  // namespace

std::vector<GoldenCase> golden_cases() {
    using data::QuestionStyle;
    using data::SeriesKind;
    using prompt::CutoffDirective;
    using prompt::CutoffMode;
    std::vector<GoldenCase> out;

    auto spx = spec("S&P 500", SeriesKind::level, Frequency::daily, QuestionStyle::closing_value);
    spx.display.thousands_separator = true;
    const std::vector<data::Observation> spx_context{{ymd(2019, 3, 13), 2808.48, {}}, {ymd(2019, 3, 14), 2834.40, {}}};
    out.push_back({"daily_value_no_context", prompt::render_recall(spx, ymd(2019, 3, 15), {}, {})});
    out.push_back({"daily_value_context", prompt::render_recall(spx, ymd(2019, 3, 15), spx_context, {})});
    CutoffDirective post;
    post.model_cutoff = ymd(2023, 10, 1);
    out.push_back({"daily_value_post_cutoff", prompt::render_recall(spx, ymd(2024, 2, 1), {}, post)});

    auto fc = spx;
    fc.question = QuestionStyle::forecast_closing_value;
    out.push_back({"forecast_daily_value", prompt::render_recall(fc, ymd(2019, 3, 15), {}, {})});
    out.push_back({"forecast_daily_value_context", prompt::render_recall(fc, ymd(2019, 3, 15), spx_context, {})});

    prompt::RenderOptions strict;
    strict.variant = prompt::PromptVariant::strict_numeric;
    out.push_back({"daily_value_strict_numeric", prompt::render_recall(spx, ymd(2019, 3, 15), {}, {}, strict)});

    auto unrate = spec("US unemployment rate", SeriesKind::rate, Frequency::monthly, QuestionStyle::period_value);
    out.push_back({"monthly_rate", prompt::render_recall(unrate, ymd(1995, 6, 1), {}, {})});
    auto starts = spec("US housing starts", SeriesKind::level, Frequency::monthly, QuestionStyle::period_value);
    out.push_back({"monthly_level", prompt::render_recall(starts, ymd(1995, 6, 1), {}, {})});
    auto gdp = spec("earliest estimate of the US GDP growth rate", SeriesKind::rate, Frequency::quarterly,
                    QuestionStyle::period_value);
    out.push_back({"quarterly_rate", prompt::render_recall(gdp, ymd(2020, 10, 1), {}, {})});
    auto vix = spec("VIX", SeriesKind::level, Frequency::monthly, QuestionStyle::end_of_month_value);
    out.push_back({"end_of_month_level", prompt::render_recall(vix, ymd(2008, 10, 1), {}, {})});

    auto aapl = spec("AAPL", SeriesKind::level, Frequency::monthly, QuestionStyle::closing_price);
    const std::vector<data::Observation> one{{ymd(2020, 7, 1), 106.26, {}}};
    const std::vector<data::Observation> two{{ymd(2020, 6, 1), 91.20, {}}, {ymd(2020, 7, 1), 106.26, {}}};
    out.push_back({"closing_price_no_context", prompt::render_recall(aapl, ymd(2020, 8, 1), {}, {})});
    out.push_back({"closing_price_one_context", prompt::render_recall(aapl, ymd(2020, 8, 1), one, {})});
    out.push_back({"closing_price_two_context", prompt::render_recall(aapl, ymd(2020, 8, 1), two, {})});

    const std::vector<std::string> nasdaq{"NASDAQ Composite"};
    const std::vector<std::string> pair{"S&P 500", "NASDAQ Composite"};
    out.push_back({"monthly_direction",
                   prompt::render_direction_relative(prompt::CategoricalKind::direction, nasdaq, ymd(2015, 8, 1))});
    out.push_back({"monthly_pct_change",
                   prompt::render_direction_relative(prompt::CategoricalKind::pct_change, nasdaq, ymd(2015, 8, 1))});
    out.push_back({"relative_performance",
                   prompt::render_direction_relative(prompt::CategoricalKind::relative, pair, ymd(2015, 12, 31))});

    std::vector<data::TextRecord> headlines(2);
    headlines[0].record_id = "h1";
    headlines[0].date = ymd(2008, 9, 15);
    headlines[0].title = "Business and Finance";
    headlines[0].body = "Lehman filed for bankruptcy protection.";
    headlines[1].record_id = "h2";
    headlines[1].date = ymd(2008, 9, 15);
    headlines[1].title = "World-Wide";
    headlines[1].body = "Hurricane Ike left millions without power.";
    out.push_back({"headline_date", prompt::render_headline(headlines, false)});
    out.push_back({"headline_date_level", prompt::render_headline(headlines, true)});

    CutoffDirective fake;
    fake.fake_cutoff = ymd(2010, 12, 31);
    fake.current_date = ymd(2023, 10, 1);
    for (auto [mode, name] : {std::pair{CutoffMode::both, "fake_cutoff_both"},
                              std::pair{CutoffMode::system_only, "fake_cutoff_system_only"},
                              std::pair{CutoffMode::user_only, "fake_cutoff_user_only"}}) {
        fake.mode = mode;
        out.push_back({name, prompt::render_recall(gdp, ymd(2012, 1, 1), {}, fake)});
    }
    CutoffDirective no_current;
    no_current.mode = CutoffMode::system_only;
    no_current.fake_cutoff = ymd(2010, 12, 31);
    out.push_back({"fake_cutoff_no_current_date", prompt::render_recall(gdp, ymd(2012, 1, 1), {}, no_current)});
    CutoffDirective mid_year = fake;
    mid_year.mode = CutoffMode::both;
    mid_year.fake_cutoff = ymd(2015, 6, 30);
    out.push_back({"fake_cutoff_mid_year", prompt::render_recall(gdp, ymd(2016, 1, 1), {}, mid_year)});
    CutoffDirective rolling;
    rolling.mode = CutoffMode::rolling;
    out.push_back({"rolling_cutoff", prompt::render_recall(spx, ymd(2019, 3, 15), {}, rolling)});

    auto masking = prompt::render_masking_pair("Apple reported record iPhone revenue for the quarter.");
    out.push_back({"mask_anonymize", masking.anonymize});
    out.push_back({"mask_identify",
                   prompt::fill_identification(masking.identify_template,
                                               "Company_1 reported record product_type_1 revenue for the quarter_x.")});
    out.push_back({"econ_logic", prompt::render_econ_logic("Tesla recalls two million vehicles over autopilot.")});

    auto probe = [](const std::string& variable, Date d, Frequency f, bool with) {
        prompt::PromptBundle b;
        b.user_message = prompt::render_embed_probe(variable, d, f, with);
        b.answer_schema = prompt::AnswerSchema::free_text;
        b.task_tag = "embed";
        return b;
    };
    out.push_back({"embed_probe_quarterly",
                   probe("earliest estimate of the US GDP growth rate", ymd(2020, 10, 1), Frequency::quarterly, true)});
    out.push_back({"embed_probe_monthly", probe("US CPI inflation rate", ymd(1995, 6, 1), Frequency::monthly, true)});
    out.push_back({"embed_probe_daily_date_only", probe("S&P 500 closing value", ymd(2019, 3, 15), Frequency::daily, false)});
    return out;
}

std::string golden_text(const prompt::PromptBundle& bundle) {
    return "=== task ===\n" + bundle.task_tag + "\n=== schema ===\n" + std::string(prompt::to_string(bundle.answer_schema)) +
           "\n=== system ===\n" + bundle.system_message + "\n=== user ===\n" + bundle.user_message + "\n";
}

std::filesystem::path golden_dir() { return MEMAUDIT_GOLDEN_DIR; }

}  // namespace memaudit::testing

// ---- fixture ----

namespace memaudit::testing {

namespace {

std::uint64_t text_hash(const std::string& s) { return std::stoull(gateway::sha256_hex(s).substr(0, 15), nullptr, 16); }

std::string fixed2(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string us_date(std::uint64_t h) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02u/%02u/2023", static_cast<unsigned>(8 + h % 4),
                  static_cast<unsigned>(1 + (h / 4) % 28));
    return buf;
}

}  // namespace

std::string generic_reply(const std::string& user) {
    const auto h = text_hash(user);
    const auto conf = std::to_string(h % 101);
    if (user.find("ANONYMIZE") != std::string::npos) {
        return "Company_1 discussed product_type_1 results in quarter_x (variant " + std::to_string(h % 97) + ").";
    }
    if (user.find("Company Estimate: TIK") != std::string::npos) {
        if (h % 7 == 0) return "I cannot identify this company.";
        static const char* tickers[] = {"AAA", "BBB", "CCC"};
        return std::string("Company Estimate: ") + tickers[h % 3] + ", Industry Estimate: Technology, Quarter Estimate: Q" +
               std::to_string(1 + (h / 3) % 4) + ", Year Estimate: " + std::to_string(2018 + (h / 12) % 3);
    }
    if (user.find("- date: The date of the headlines") != std::string::npos) {
        return "{\"date\": \"" + us_date(h) + "\", \"answer\": " + fixed2(4300.0 + static_cast<double>(h % 30000) / 100.0) +
               ", \"confidence\": " + conf + "}";
    }
    if (user.find("\"mm/dd/yyyy\"") != std::string::npos) {
        return "{\"answer\": \"" + us_date(h) + "\", \"confidence\": " + conf + "}";
    }
    if (user.find("either \"up\" or \"down\"") != std::string::npos) {
        return std::string("{\"answer\": \"") + (h % 2 ? "up" : "down") + "\", \"confidence\": " + conf + "}";
    }
    static const std::regex relative(R"(Which performed better in \d+: (.+) or (.+)\? Provide)");
    std::smatch m;
    if (std::regex_search(user, m, relative)) {
        return "{\"answer\": \"" + (h % 2 ? m[1].str() : m[2].str()) + "\", \"confidence\": " + conf + "}";
    }
    switch (h % 20) {
        case 0: return "{\"answer\": null, \"confidence\": 0}";
        case 1: return "{\"answer\": 0, \"confidence\": 10}";
        case 2: return "I'm sorry, I don't have that information.";
        default: break;
    }
    return "```json\n{\"answer\": " + fixed2(static_cast<double>(h % 100000) / 100.0) + ", \"confidence\": " + conf +
           "}\n```";
}

FakeTransport::Handler generic_handler(std::size_t dim) {
    return [dim](const std::string& path, const json& body) -> json {
        if (path == "/embeddings") return embedding_response(body, dim);
        return chat_response(generic_reply(user_message(body)));
    };
}

std::filesystem::path make_fixture(const std::filesystem::path& dir) {
    using namespace std::chrono;
    std::filesystem::create_directories(dir / "cache");

    std::string unrate = "date,value\n";
    for (int i = 0; i < 72; ++i) {
        const int y = 2019 + i / 12, m = 1 + i % 12;
        char key[16];
        std::snprintf(key, sizeof key, "%04d-%02d", y, m);
        unrate += std::string(key) + "," + fixed2(std::round(10.0 * (4.0 + 0.8 * std::sin(i / 5.0))) / 10.0) + "\n";
    }
    write_text(dir / "data/unrate.csv", unrate);

    std::string spx = "date,value\n";
    int k = 0;
    for (sys_days d = sys_days{2023y / August / 1}; d <= sys_days{2023y / November / 30}; d += days{1}) {
        const weekday wd{d};
        if (wd == Saturday || wd == Sunday) continue;
        spx += to_iso(year_month_day{d}) + "," + fixed2(4400.0 + 60.0 * std::sin(k / 4.0) + 1.5 * k) + "\n";
        ++k;
    }
    write_text(dir / "data/spx.csv", spx);

    std::string djia = "date,value\n", nasdaq = "date,value\n";
    for (int i = 0; i < 108; ++i) {
        char key[16];
        std::snprintf(key, sizeof key, "%04d-%02d", 2016 + i / 12, 1 + i % 12);
        djia += std::string(key) + "," + fixed2(17000.0 + 150.0 * i + 900.0 * std::sin(i / 3.0)) + "\n";
        nasdaq += std::string(key) + "," + fixed2(4500.0 + 95.0 * i + 400.0 * std::cos(i / 2.5)) + "\n";
    }
    write_text(dir / "data/djia.csv", djia);
    write_text(dir / "data/nasdaq.csv", nasdaq);

    std::string gdp = "date,value\n";
    for (int i = 0; i < 84; ++i) {
        gdp += std::to_string(1995 + i / 4) + "-Q" + std::to_string(1 + i % 4) + "," +
               fixed2(2.5 + 1.5 * std::sin(i / 3.0) + 0.3 * std::cos(i * 1.7)) + "\n";
    }
    write_text(dir / "data/gdp.csv", gdp);

    write_text(dir / "data/headlines.csv",
               "record_id,date,title,body\n"
               "h1,2023-08-15,Business and Finance,\"Retail sales rose more than expected, lifting bond yields.\"\n"
               "h2,2023-08-15,World-Wide,Wildfires forced evacuations across the island.\n"
               "h3,2023-09-20,Business and Finance,The central bank held rates steady and signaled one more hike.\n"
               "h4,2023-10-10,Business and Finance,Oil prices jumped after weekend attacks.\n"
               "h5,2023-10-10,World-Wide,\"Leaders met to discuss the conflict, with few results.\"\n"
               "h6,2023-11-02,Business and Finance,Treasury yields fell after a softer jobs report.\n");

    std::string transcripts = "record_id,date,ticker,quarter,year,industry,body\n";
    const char* tickers[] = {"AAA", "AAA", "AAA", "AAA", "AAA", "BBB", "BBB", "BBB", "CCC", "CCC"};
    for (int i = 0; i < 10; ++i) {
        transcripts += "t" + std::to_string(i) + ",2019-0" + std::to_string(1 + i % 9) + "-15," + tickers[i] + "," +
                       std::to_string(1 + i % 4) + "," + std::to_string(2018 + i % 3) + ",Technology," +
                       "\"Good morning and welcome to our call number " + std::to_string(i) +
                       ". Revenue grew again this quarter.\"\n";
    }
    write_text(dir / "data/transcripts.csv", transcripts);

    json config = {
        {"mode", "strict-replay"},
        {"cache_dir", "cache"},
        {"seed", 7},
        {"cutoff_date", "2023-10-01"},
        {"provider",
         {{"tag", "fixture"},
          {"chat_model", "fixture-chat"},
          {"embedding_model", "fixture-embed"},
          {"model_cutoff", "2023-10-01"},
          {"requests_per_minute", 1e9},
          {"burst", 1000},
          {"max_in_flight", 4}}},
        {"series",
         json::array({
             {{"name", "US unemployment rate"}, {"path", "data/unrate.csv"}, {"kind", "rate"}, {"frequency", "monthly"},
              {"threshold", 4.0}},
             {{"name", "S&P 500"}, {"path", "data/spx.csv"}, {"kind", "level"}, {"frequency", "daily"},
              {"threshold", 4450.0}, {"display", {{"decimals", 2}, {"thousands_separator", true}}}},
             {{"name", "Dow Jones Industrial Average"}, {"path", "data/djia.csv"}, {"kind", "level"},
              {"frequency", "monthly"}, {"question", "end_of_month_value"}},
             {{"name", "NASDAQ Composite"}, {"path", "data/nasdaq.csv"}, {"kind", "level"}, {"frequency", "monthly"},
              {"question", "end_of_month_value"}},
             {{"name", "earliest estimate of the US GDP growth rate"}, {"path", "data/gdp.csv"}, {"kind", "rate"},
              {"frequency", "quarterly"}, {"threshold", 2.5}},
         })},
        {"recall",
         {{"series", {"US unemployment rate", "S&P 500", "earliest estimate of the US GDP growth rate"}},
          {"context_depths", {0, 2}},
          {"direction", {"Dow Jones Industrial Average", "NASDAQ Composite"}},
          {"pct_change", {"NASDAQ Composite"}},
          {"relative", json::array({json::array({"Dow Jones Industrial Average", "NASDAQ Composite"})})},
          {"headlines", {{"path", "data/headlines.csv"}, {"want_level", true}, {"level_series", "S&P 500"}}}}},
        {"cutoff",
         {{"series", {"earliest estimate of the US GDP growth rate"}},
          {"fake_cutoff", "2010-12-31"},
          {"current_date", "2023-10-01"}}},
        {"mask", {{"transcripts", "data/transcripts.csv"}, {"fixed_ticker", "BBB"}}},
        {"embed",
         {{"targets",
           {{{"series", "earliest estimate of the US GDP growth rate"},
             {"variable", "earliest estimate of the US GDP growth rate"}},
            {{"series", "US unemployment rate"}, {"variable", "US unemployment rate"}}}},
          {"window", 20},
          {"folds", 6}}},
        {"power", {{"n_post", 17}, {"p_post", 0.5}, {"alpha", 0.05}, {"target_power", 0.8}}},
        {"theory", {{"labels", {"up", "down"}}, {"y_obs", "up"}}},
    };
    write_text(dir / "config.json", config.dump(2) + "\n");

    json live = config;
    live["mode"] = "live";
    live["provider"]["base_url"] = "http://provider.invalid/v1";
    auto cfg = report::validate_config_json(live, dir);
    for (auto sub : {report::Subcommand::recall, report::Subcommand::cutoff, report::Subcommand::mask,
                     report::Subcommand::embed}) {
        report::AuditOptions options;
        options.out_dir = dir / "live_run" / std::string(report::to_string(sub));
        options.transport = std::make_unique<FakeTransport>(generic_handler());
        options.sleeper = [](std::chrono::milliseconds) {};
        report::run_audit(cfg, sub, std::move(options));
    }
    return dir / "config.json";
}

}  // namespace memaudit::testing
