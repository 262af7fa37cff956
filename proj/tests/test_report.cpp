#include "memaudit/error.hpp"
#include "memaudit/report/audit.hpp"
#include "memaudit/report/config.hpp"
#include "memaudit/report/writers.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <chrono>
#include <fstream>
#include <map>

using namespace memaudit;
using namespace memaudit::report;
using memaudit::testing::make_fixture;
using memaudit::testing::read_text;
using memaudit::testing::TempDir;
using memaudit::testing::write_text;
using nlohmann::json;

namespace {

bool mentions(const std::vector<std::string>& errors, const std::string& needle) {
    for (const auto& e : errors) {
        if (e.find(needle) != std::string::npos) return true;
    }
    return false;
}

std::map<std::string, std::string> read_tree(const std::filesystem::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(root)) {
        if (entry.is_regular_file()) out[std::filesystem::relative(entry.path(), root).string()] = read_text(entry.path());
    }
    return out;
}

// One fixture (data files plus a filled cache) shared by the audit tests.
class AuditFixture : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        dir_ = new TempDir("report");
        config_path_ = make_fixture(dir_->path());
    }
    static void TearDownTestSuite() {
        delete dir_;
        dir_ = nullptr;
    }

    static AuditConfig load(const CliOverrides& overrides = {}) { return validate_config(config_path_, overrides); }
    static json raw() { return json::parse(read_text(config_path_)); }
    static const std::filesystem::path& dir() { return dir_->path(); }

    static AuditResult run(const AuditConfig& c, Subcommand sub, const std::filesystem::path& out) {
        AuditOptions o;
        o.out_dir = out;
        o.sleeper = [](std::chrono::milliseconds) {};
        return run_audit(c, sub, std::move(o));
    }

    static inline TempDir* dir_ = nullptr;
    static inline std::filesystem::path config_path_;
};

}  // namespace

TEST(Config, ReportsEveryProblem) {
    TempDir tmp("config");
    const json j = {
        {"mode", "replay"},
        {"series", json::array({{{"name", "u"}, {"path", "missing.csv"}, {"kind", "rate"}, {"frequency", "monthly"},
                                 {"threshold_accuracy", true}}})},
        {"recall", {{"series", {"u", "nope"}}}},
        {"theory", {{"labels", {"up", "down"}}, {"y_obs", "sideways"}}},
        {"power", {{"p_post", 1.5}}},
    };
    try {
        validate_config_json(j, tmp.path());
        FAIL() << "expected ConfigValidationError";
    } catch (const ConfigValidationError& e) {
        const auto& errs = e.errors();
        EXPECT_GE(errs.size(), 5u);
        EXPECT_TRUE(mentions(errs, "cache_dir")) << e.what();
        EXPECT_TRUE(mentions(errs, "path does not exist")) << e.what();
        EXPECT_TRUE(mentions(errs, "no threshold given")) << e.what();
        EXPECT_TRUE(mentions(errs, "unknown series 'nope'")) << e.what();
        EXPECT_TRUE(mentions(errs, "theory.y_obs")) << e.what();
        EXPECT_TRUE(mentions(errs, "power.p_post")) << e.what();
        // what() lists them all too.
        EXPECT_NE(std::string(e.what()).find("theory.y_obs"), std::string::npos);
    }
}

TEST(Config, MissingFileIsAValidationError) {
    EXPECT_THROW(validate_config("/nonexistent/memaudit/config.json"), ConfigValidationError);
}

TEST(Writers, PlotSeries) {
    std::vector<metrics::NumericEvalRow> rows(2);
    rows[0].period_key = "2020-01";
    rows[0].actual = 100.0;
    rows[0].estimated = 105.0;
    rows[1].period_key = "2020-02";
    rows[1].actual = 50.0;
    rows[1].estimated = 7.0;
    rows[1].refusal = true;
    EXPECT_EQ(plot_series_csv(rows),
              "period,actual,estimated,pct_error\n"
              "2020-01,100.000000,105.000000,5.000000\n"
              "2020-02,50.000000,,\n");
}

TEST(Writers, TablesAndMarkdown) {
    Table t{{"name", "value"}, {}};
    t.add({"a|b", cell(std::optional<double>(1.23456), 2)});
    t.add({"x, y", cell(std::optional<double>())});
    EXPECT_THROW(t.add({"only one"}), PreconditionError);
    EXPECT_EQ(table_csv(t), "name,value\na|b,1.23\n\"x, y\",\n");
    EXPECT_EQ(markdown_table(t), "| name | value |\n| --- | --- |\n| a\\|b | 1.23 |\n| x, y |  |\n");
    const std::vector<json> rows{{{"b", 1}, {"a", "x"}}, json::object()};
    EXPECT_EQ(jsonl(rows), "{\"a\":\"x\",\"b\":1}\n{}\n");
}

TEST(Writers, FileStem) {
    EXPECT_EQ(file_stem("recall_S&P 500"), "recall_s_p_500");
    EXPECT_EQ(file_stem("recall_US unemployment rate_ctx2"), "recall_us_unemployment_rate_ctx2");
    EXPECT_EQ(file_stem("  --Mixed..Case--  "), "mixed_case");
    EXPECT_THROW(file_stem("&&"), PreconditionError);
}

TEST(Writers, BundleManifestListsSortedHashes) {
    TempDir tmp("bundle");
    BundleWriter w(tmp.path());
    Table t{{"k"}, {}};
    t.add({"1"});
    w.table("zeta", t);
    w.table("Alpha", t);
    w.heading("Title", 1);
    w.paragraph("text");
    w.finish({{"tool", "memaudit"}});
    const auto m = json::parse(read_text(tmp / "manifest.json"));
    ASSERT_EQ(m["files"].size(), 3u);
    EXPECT_EQ(m["files"][0]["path"], "report.md");
    EXPECT_EQ(m["files"][1]["path"], "tables/alpha.csv");
    EXPECT_EQ(m["files"][2]["path"], "tables/zeta.csv");
    // SHA-256 of "k\n1\n".
    EXPECT_EQ(m["files"][1]["sha256"], "92014a4a23ff5970bfa79bef9866d80aed2f5578a22e5d6d3555361614d50c35");
    EXPECT_EQ(read_text(tmp / "report.md"), "# Title\n\ntext\n");
    EXPECT_EQ(m["tool"], "memaudit");
}

TEST(Writers, CollidingNamesAreRejected) {
    TempDir tmp("collide");
    BundleWriter w(tmp.path());
    Table t{{"k"}, {}};
    w.table("S&P 500", t);
    w.table("S&P 500", t);
    EXPECT_THROW(w.table("s p 500", t), PreconditionError);
    // Different directories do not collide.
    w.rows("s p 500", {});
}

TEST_F(AuditFixture, PowerAndTheoryNeedNoProvider) {
    const auto c = load();
    TempDir out("power");
    run(c, Subcommand::power, out / "p");
    const auto gap = read_text(out / "p" / "tables" / "min_detectable_gap.csv");
    EXPECT_NE(gap.find("\n17,0.5000,0.0500,0.8000,0.301529"), std::string::npos) << gap;
    EXPECT_TRUE(std::filesystem::exists(out / "p" / "tables" / "power_curve.csv"));

    run(c, Subcommand::theory_demo, out / "t");
    const auto set = read_text(out / "t" / "tables" / "theory_identified_set.csv");
    EXPECT_NE(set.find("up"), std::string::npos);
    EXPECT_NE(set.find("down"), std::string::npos);
    EXPECT_TRUE(std::filesystem::exists(out / "t" / "manifest.json"));
}

TEST_F(AuditFixture, StrictReplayIsByteIdentical) {
    const auto c = load();
    TempDir out("replay");
    const auto start = std::chrono::steady_clock::now();
    const auto a = run(c, Subcommand::recall, out / "a");
    const auto b = run(c, Subcommand::recall, out / "b");
    EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(), 10.0);
    EXPECT_FALSE(a.partial);
    EXPECT_EQ(a.gateway.network_calls, 0u);
    const auto ta = read_tree(out / "a"), tb = read_tree(out / "b");
    EXPECT_GT(ta.size(), 5u);
    EXPECT_EQ(ta, tb);
    EXPECT_TRUE(ta.count("rows/recall_us_unemployment_rate.jsonl"));
    EXPECT_TRUE(ta.count("plots/recall_s_p_500_ctx0.csv"));
    EXPECT_EQ(a.refusals, b.refusals);
}

TEST_F(AuditFixture, ConfigHashFollowsOverrides) {
    const auto base = load();
    EXPECT_EQ(load().config_hash, base.config_hash);
    CliOverrides seed;
    seed.seed = 99;
    EXPECT_NE(load(seed).config_hash, base.config_hash);
}

TEST_F(AuditFixture, StrictReplayMissThrows) {
    auto j = raw();
    std::filesystem::create_directories(dir() / "empty_cache_strict");
    j["cache_dir"] = "empty_cache_strict";
    const auto c = validate_config_json(j, dir());
    TempDir out("strict_miss");
    EXPECT_THROW(run(c, Subcommand::recall, out.path()), gateway::CacheMissError);
}

TEST_F(AuditFixture, ReplayMissBecomesRefusals) {
    auto j = raw();
    std::filesystem::create_directories(dir() / "empty_cache_replay");
    j["cache_dir"] = "empty_cache_replay";
    j["mode"] = "replay";
    const auto c = validate_config_json(j, dir());
    TempDir out("replay_miss");
    const auto r = run(c, Subcommand::recall, out.path());
    EXPECT_FALSE(r.partial);
    EXPECT_GT(r.refusals, 0u);
    const auto rows = read_text(out / "rows" / "recall_us_unemployment_rate.jsonl");
    EXPECT_NE(rows.find("\"cause\":\"cache_miss\""), std::string::npos);
}

TEST_F(AuditFixture, RequestLimitGivesPartialBundle) {
    auto j = raw();
    j["mode"] = "live";
    j["provider"]["base_url"] = "http://provider.invalid/v1";
    std::filesystem::create_directories(dir() / "budget_cache");
    j["cache_dir"] = "budget_cache";
    CliOverrides o;
    o.max_requests = 3;
    const auto c = validate_config_json(j, dir(), o);
    TempDir out("budget");
    AuditOptions opts;
    opts.out_dir = out.path();
    opts.transport = std::make_unique<memaudit::testing::FakeTransport>(memaudit::testing::generic_handler());
    opts.sleeper = [](std::chrono::milliseconds) {};
    const auto r = run_audit(c, Subcommand::recall, std::move(opts));
    EXPECT_TRUE(r.partial);
    EXPECT_EQ(r.gateway.network_calls, 3u);
    const auto m = json::parse(read_text(out / "manifest.json"));
    EXPECT_EQ(m["partial"], true);
}
