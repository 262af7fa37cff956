#include "memaudit/error.hpp"
#include "memaudit/gateway/cache.hpp"
#include "memaudit/gateway/digest.hpp"
#include "memaudit/gateway/embedding_store.hpp"
#include "memaudit/gateway/gateway.hpp"
#include "memaudit/gateway/reply.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <fstream>

using namespace memaudit;
using namespace memaudit::gateway;
using memaudit::testing::chat_response;
using memaudit::testing::FakeTransport;
using memaudit::testing::generic_handler;
using memaudit::testing::read_text;
using memaudit::testing::TempDir;
using memaudit::testing::user_message;
using memaudit::testing::write_text;
using nlohmann::json;

namespace {

prompt::PromptBundle bundle(const std::string& user, prompt::AnswerSchema schema = prompt::AnswerSchema::numeric_json) {
    prompt::PromptBundle b;
    b.system_message = "S";
    b.user_message = user;
    b.answer_schema = schema;
    b.task_tag = "test";
    return b;
}

GatewayConfig config(Mode mode, const std::filesystem::path& cache_dir) {
    GatewayConfig c;
    c.mode = mode;
    c.provider_tag = "unit";
    c.chat_model = "m-1";
    c.embedding_model = "e-1";
    c.cache_dir = cache_dir;
    c.requests_per_minute = 1e9;
    c.burst = 100;
    return c;
}

auto no_sleep() {
    return [](std::chrono::milliseconds) {};
}

}  // namespace

// Digests frozen from Python's hashlib over the same canonical strings.
TEST(Digest, CanonicalFormAndPinnedHashes) {
    const auto b = bundle("What was X?");
    EXPECT_EQ(canonical_chat_request("m-1", b, ""),
              R"({"kind":"chat","model":"m-1","schema":"numeric_json","system":"S","temperature":0.0,"templates":"","user":"What was X?"})");
    EXPECT_EQ(chat_digest("m-1", b, ""), "78b88bfdf3c7e6460eaf586a5d75ba876af4a125efde2389bb0001246b60cedf");
    EXPECT_EQ(chat_digest("m-1", b, "", 1), "8ea7eb44dc09834197eca3f9255cb88f77d1cceb9c4dfb7a829f696c6fe4d038");
    EXPECT_EQ(embedding_digest("e-1", "In Q4 2020, the value was"),
              "32185bc9879dddf340749f57907bd7d2407c91547d980ec7534088b7765e2980");
    EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(Digest, EveryFieldMatters) {
    const auto b = bundle("U");
    const auto base = chat_digest("m", b, "");
    auto other = b;
    other.system_message = "T";
    EXPECT_NE(chat_digest("m", other, ""), base);
    other = b;
    other.answer_schema = prompt::AnswerSchema::date_json;
    EXPECT_NE(chat_digest("m", other, ""), base);
    EXPECT_NE(chat_digest("m2", b, ""), base);
    EXPECT_NE(chat_digest("m", b, "abc"), base);
    // The task tag is bookkeeping only.
    other = b;
    other.task_tag = "different";
    EXPECT_EQ(chat_digest("m", other, ""), base);
}

TEST(Reply, NumericForms) {
    auto r = parse_numeric_reply(R"({"answer": 2834.40, "confidence": 80})");
    EXPECT_EQ(r.status, ParseStatus::ok);
    EXPECT_DOUBLE_EQ(*r.answer_numeric, 2834.40);
    EXPECT_DOUBLE_EQ(*r.confidence, 80.0);
    EXPECT_FALSE(r.refusal);

    r = parse_numeric_reply("Sure! ```json\n{\"answer\": \"2,834.40\", \"confidence\": \"75\"}\n```");
    EXPECT_DOUBLE_EQ(*r.answer_numeric, 2834.40);
    EXPECT_DOUBLE_EQ(*r.confidence, 75.0);

    r = parse_numeric_reply(R"({"answer": "3.5%", "confidence": 140})");
    EXPECT_DOUBLE_EQ(*r.answer_numeric, 3.5);
    EXPECT_FALSE(r.confidence);

    r = parse_numeric_reply(R"({"answer": null, "confidence": 0})");
    EXPECT_TRUE(r.refusal);
    EXPECT_EQ(r.status, ParseStatus::refusal);
    EXPECT_EQ(r.cause, "null_answer");

    r = parse_numeric_reply(R"({"answer": "unknown"})");
    EXPECT_TRUE(r.refusal);

    r = parse_numeric_reply("I don't know.");
    EXPECT_EQ(r.status, ParseStatus::malformed);
    EXPECT_TRUE(r.refusal);
    EXPECT_EQ(r.cause, "malformed");
    EXPECT_EQ(r.raw_text, "I don't know.");
}

TEST(Reply, ZeroRule) {
    auto r = parse_numeric_reply(R"({"answer": 0, "confidence": 10})");
    EXPECT_FALSE(r.refusal);
    auto kept = r;
    apply_zero_rule(kept, false);
    EXPECT_FALSE(kept.refusal);
    apply_zero_rule(r, true);
    EXPECT_TRUE(r.refusal);
    EXPECT_EQ(r.cause, "zero_answer");
    auto nonzero = parse_numeric_reply(R"({"answer": 0.1})");
    apply_zero_rule(nonzero, true);
    EXPECT_FALSE(nonzero.refusal);
}

TEST(Reply, ExtractJsonSkipsBracesInProse) {
    EXPECT_EQ(extract_json_object("noise {not json} then {\"a\": {\"b\": \"}\"}} tail"), R"({"a": {"b": "}"}})");
    EXPECT_FALSE(extract_json_object("no object here"));
}

TEST(Reply, CategoricalAndDates) {
    auto r = parse_categorical_reply(R"({"answer": " Up ", "confidence": 60})");
    EXPECT_EQ(r.answer_text, "Up");
    r = parse_date_reply(R"({"answer": "09/15/2008", "confidence": 50})");
    EXPECT_EQ(r.date_text, "09/15/2008");
    EXPECT_FALSE(r.refusal);
    r = parse_date_and_level_reply(R"({"date": "09/15/2008", "answer": 1192.70, "confidence": 40})");
    EXPECT_EQ(r.date_text, "09/15/2008");
    EXPECT_DOUBLE_EQ(*r.answer_numeric, 1192.70);
    r = parse_reply("   ", prompt::AnswerSchema::free_text);
    EXPECT_TRUE(r.refusal);
    r = parse_reply("  some text \n", prompt::AnswerSchema::free_text);
    EXPECT_EQ(r.answer_text, "some text");
}

TEST(Reply, IdentificationVariants) {
    const std::vector<std::string> variants{
        "Company Estimate: ETH, Industry Estimate: Home Furnishings, Quarter Estimate: Q1, Year Estimate: 2018",
        "Company Estimate: eth, Industry Estimate: Home Furnishings, Quarter Estimate: 1, Year Estimate: 2018",
        "company estimate: ETH, industry estimate: Home Furnishings, quarter estimate: q1, year estimate: 2018",
        "COMPANY ESTIMATE: ETH, INDUSTRY ESTIMATE: Home Furnishings, QUARTER ESTIMATE: Q1, YEAR ESTIMATE: 2018",
        "Company Estimate:ETH,Industry Estimate:Home Furnishings,Quarter Estimate:Q1,Year Estimate:2018",
        "Company Estimate:  ETH ,  Industry Estimate:  Home Furnishings ,  Quarter Estimate:  Q1 ,  Year Estimate:  2018",
        "Company Estimate: ETH\nIndustry Estimate: Home Furnishings\nQuarter Estimate: Q1\nYear Estimate: 2018",
        "Company Estimate: ETH, Industry Estimate: Home Furnishings, Quarter Estimate: Q 1, Year Estimate: 2018",
        "Company Estimate: $ETH, Industry Estimate: Home Furnishings, Quarter Estimate: Q1, Year Estimate: 2018",
        "Company Estimate: ETH; Industry Estimate: Home Furnishings; Quarter Estimate: Q1; Year Estimate: 2018",
        "Here is my answer: Company Estimate: ETH, Industry Estimate: Home Furnishings, Quarter Estimate: Q1, Year "
        "Estimate: 2018",
        "Company Estimate: ETH, Industry Estimate: Home Furnishings, Quarter Estimate: Q1, Year Estimate: 2018.",
        "Company  Estimate: ETH, Industry  Estimate: Home Furnishings, Quarter  Estimate: Q1, Year  Estimate: 2018",
        "\tCompany Estimate:\tETH,\tIndustry Estimate:\tHome Furnishings,\tQuarter Estimate:\tQ1,\tYear Estimate:\t2018",
        "Company Estimate: ETH , Industry Estimate: Home Furnishings , Quarter Estimate: Q1 , Year Estimate: 2018",
        "Company Estimate: ETH, Industry Estimate: Home Furnishings, Quarter Estimate: q 1, Year Estimate: 2018",
        "Company Estimate: ETH,\r\nIndustry Estimate: Home Furnishings,\r\nQuarter Estimate: Q1,\r\nYear Estimate: 2018",
        "**Company Estimate: ETH, Industry Estimate: Home Furnishings, Quarter Estimate: Q1, Year Estimate: 2018**",
        "Company Estimate: Eth, Industry Estimate: Home Furnishings, Quarter Estimate: Q1, Year Estimate: 2018 ",
        "company Estimate : ETH, industry Estimate : Home Furnishings, quarter Estimate : Q1, year Estimate : 2018",
    };
    ASSERT_EQ(variants.size(), 20u);
    for (const auto& v : variants) {
        const auto r = parse_identification_reply(v);
        EXPECT_EQ(r.status, ParseStatus::ok) << v;
        EXPECT_EQ(r.ticker, "ETH") << v;
        EXPECT_EQ(r.industry, "Home Furnishings") << v;
        EXPECT_EQ(r.quarter, 1) << v;
        EXPECT_EQ(r.year, 2018) << v;
    }
}

TEST(Reply, IdentificationMalformed) {
    for (const auto* v : {"I cannot identify this company.",
                          "Company Estimate: ETH, Industry Estimate: , Quarter Estimate: Q1, Year Estimate: 2018",
                          "Company Estimate: ETH, Industry Estimate: X, Quarter Estimate: Q5, Year Estimate: 2018",
                          "Company Estimate: ETH, Industry Estimate: X, Quarter Estimate: Q1", ""}) {
        EXPECT_EQ(parse_identification_reply(v).status, ParseStatus::malformed) << v;
    }
}

TEST(Cache, PersistsAndSkipsCorruptLines) {
    TempDir dir("cache");
    {
        ReplayCache c(dir.path(), "p");
        c.record_chat("d1", "hello");
        c.record_embedding("e1", {0.5, -1.0});
        c.record_chat("d1", "second");
    }
    {
        std::ofstream out(dir / "p.jsonl", std::ios::app);
        out << "{not json\n{\"digest\":\"x\",\"kind\":\"other\"}\n";
    }
    ReplayCache c(dir.path(), "p");
    EXPECT_EQ(c.corrupt_lines(), 2u);
    EXPECT_EQ(c.chat("d1"), "second");
    EXPECT_EQ(c.embedding("e1"), (std::vector<double>{0.5, -1.0}));
    EXPECT_FALSE(c.chat("e1"));
    EXPECT_THROW(ReplayCache(dir.path(), "a/b"), PreconditionError);
}

TEST(Gateway, LiveRecordsThenStrictReplayReproduces) {
    TempDir dir("gw_live");
    auto calls = std::make_shared<std::atomic<int>>(0);
    const auto b = bundle("What was the S&P 500 closing value on March 15, 2019? Provide your best estimate.");
    ModelReply live_reply;
    {
        Gateway g(config(Mode::live, dir.path()), std::make_unique<FakeTransport>(generic_handler(), calls));
        g.set_sleeper(no_sleep());
        live_reply = g.complete({b, "", 0.0});
        EXPECT_EQ(g.complete({b, "", 0.0}), live_reply);
        EXPECT_EQ(g.stats().cache_hits, 1u);
    }
    const int live_calls = calls->load();
    EXPECT_GE(live_calls, 1);
    Gateway replay(config(Mode::strict_replay, dir.path()), nullptr);
    EXPECT_EQ(replay.complete({b, "", 0.0}), live_reply);
    EXPECT_EQ(replay.stats().network_calls, 0u);
    EXPECT_EQ(calls->load(), live_calls);
}

TEST(Gateway, MissHandlingByMode) {
    TempDir dir("gw_miss");
    const auto b = bundle("unseen question");
    Gateway strict(config(Mode::strict_replay, dir.path()), nullptr);
    EXPECT_THROW(strict.complete({b, "", 0.0}), CacheMissError);
    Gateway replay(config(Mode::replay, dir.path()), nullptr);
    const auto r = replay.complete({b, "", 0.0});
    EXPECT_TRUE(r.refusal);
    EXPECT_EQ(r.cause, "cache_miss");
    const std::vector<std::string> texts{"x"};
    EXPECT_THROW(replay.embed(texts), CacheMissError);
    EXPECT_THROW(Gateway(config(Mode::live, dir.path()), nullptr), ConfigError);
}

TEST(Gateway, ReasksOnceAfterMalformedReply) {
    TempDir dir("gw_reask");
    auto calls = std::make_shared<std::atomic<int>>(0);
    Gateway g(config(Mode::live, dir.path()), std::make_unique<FakeTransport>(
                                                   [calls](const std::string&, const json&) {
                                                       return chat_response(calls->load() == 1
                                                                                ? "no idea"
                                                                                : R"({"answer": 4.2})");
                                                   },
                                                   calls));
    g.set_sleeper(no_sleep());
    const auto r = g.complete({bundle("q"), "", 0.0});
    EXPECT_EQ(r.status, ParseStatus::ok);
    EXPECT_DOUBLE_EQ(*r.answer_numeric, 4.2);
    EXPECT_EQ(calls->load(), 2);
    EXPECT_EQ(g.stats().reasks, 1u);
    // Both attempts are cached under distinct digests.
    Gateway replay(config(Mode::strict_replay, dir.path()), nullptr);
    EXPECT_EQ(replay.complete({bundle("q"), "", 0.0}), r);
    EXPECT_EQ(replay.digests_used().size(), 2u);
}

TEST(Gateway, StaysMalformedAfterBudget) {
    auto calls = std::make_shared<std::atomic<int>>(0);
    Gateway g(config(Mode::live, {}), std::make_unique<FakeTransport>(
                                          [](const std::string&, const json&) { return chat_response("nope"); }, calls));
    g.set_sleeper(no_sleep());
    const auto r = g.complete({bundle("q"), "", 0.0});
    EXPECT_EQ(r.status, ParseStatus::malformed);
    EXPECT_TRUE(r.refusal);
    EXPECT_EQ(calls->load(), 2);
}

TEST(Gateway, RetriesWithBackoffThenRefuses) {
    auto calls = std::make_shared<std::atomic<int>>(0);
    std::vector<long> sleeps;
    auto cfg = config(Mode::live, {});
    cfg.max_retries = 3;
    cfg.backoff_initial = std::chrono::milliseconds(100);
    cfg.backoff_max = std::chrono::milliseconds(250);
    Gateway g(cfg, std::make_unique<FakeTransport>(
                       [](const std::string&, const json&) -> json { throw TransportError("HTTP 503", 503, true); },
                       calls));
    g.set_sleeper([&](std::chrono::milliseconds d) { sleeps.push_back(d.count()); });
    const auto r = g.complete({bundle("q"), "", 0.0});
    EXPECT_TRUE(r.refusal);
    EXPECT_EQ(r.cause, "transport_error");
    EXPECT_EQ(calls->load(), 4);
    EXPECT_EQ(sleeps, (std::vector<long>{100, 200, 250}));
}

TEST(Gateway, NonRetryableErrorsAreNotRetried) {
    auto calls = std::make_shared<std::atomic<int>>(0);
    Gateway g(config(Mode::live, {}), std::make_unique<FakeTransport>(
                                          [](const std::string&, const json&) -> json {
                                              throw TransportError("HTTP 400", 400, false);
                                          },
                                          calls));
    g.set_sleeper(no_sleep());
    EXPECT_EQ(g.complete({bundle("q"), "", 0.0}).cause, "transport_error");
    EXPECT_EQ(calls->load(), 1);
}

TEST(Gateway, CredentialErrorsPropagate) {
    Gateway g(config(Mode::live, {}), std::make_unique<FakeTransport>([](const std::string&, const json&) -> json {
                  throw ConfigError("provider rejected credentials (HTTP 401)");
              }));
    g.set_sleeper(no_sleep());
    EXPECT_THROW(g.complete({bundle("q"), "", 0.0}), ConfigError);
}

TEST(Gateway, RequestBudget) {
    auto cfg = config(Mode::live, {});
    cfg.max_requests = 3;
    Gateway g(cfg, std::make_unique<FakeTransport>(generic_handler()));
    g.set_sleeper(no_sleep());
    std::vector<ChatRequest> reqs;
    for (int i = 0; i < 10; ++i) reqs.push_back({bundle("question " + std::to_string(i)), "", 0.0});
    EXPECT_THROW(g.complete_all(reqs), BudgetExceeded);
    EXPECT_LE(g.stats().network_calls, 3u);
}

TEST(Gateway, RejectsNonZeroTemperature) {
    Gateway g(config(Mode::replay, {}), nullptr);
    EXPECT_THROW(g.complete({bundle("q"), "", 0.7}), PreconditionError);
}

TEST(Gateway, RateLimiterSpacesRequests) {
    auto cfg = config(Mode::live, {});
    cfg.requests_per_minute = 60.0;  // one per second
    cfg.burst = 2;
    Gateway g(cfg, std::make_unique<FakeTransport>(generic_handler()));
    std::vector<long> waits;
    g.set_sleeper([&](std::chrono::milliseconds d) { waits.push_back(d.count()); });
    for (int i = 0; i < 5; ++i) g.complete({bundle("rate " + std::to_string(i)), "", 0.0});
    // Two requests go through at once. The fake sleeper does not move the
    // clock, so the k-th throttled request is told to wait k seconds from now.
    // Malformed replies add re-asks, so count requests instead of prompts.
    const auto n = static_cast<long>(g.stats().network_calls);
    ASSERT_EQ(static_cast<long>(waits.size()), n - 2);
    for (std::size_t k = 0; k < waits.size(); ++k) {
        EXPECT_NEAR(waits[k], 1000.0 * static_cast<double>(k + 1), 100.0) << k;
    }
}

TEST(Gateway, CompleteAllKeepsOrder) {
    Gateway g(config(Mode::live, {}), std::make_unique<FakeTransport>([](const std::string&, const json& body) {
                  return chat_response("{\"answer\": " + user_message(body) + "}");
              }));
    g.set_sleeper(no_sleep());
    std::vector<ChatRequest> reqs;
    for (int i = 1; i <= 50; ++i) reqs.push_back({bundle(std::to_string(i)), "", 0.0});
    const auto out = g.complete_all(reqs);
    for (int i = 0; i < 50; ++i) EXPECT_DOUBLE_EQ(*out[static_cast<std::size_t>(i)].answer_numeric, i + 1.0);
}

TEST(Gateway, EmbeddingsAreCachedPerText) {
    TempDir dir("gw_embed");
    auto calls = std::make_shared<std::atomic<int>>(0);
    const std::vector<std::string> texts{"a", "b", "a", "c"};
    EmbeddingMatrix first;
    {
        Gateway g(config(Mode::live, dir.path()), std::make_unique<FakeTransport>(generic_handler(8), calls));
        g.set_sleeper(no_sleep());
        first = g.embed(texts);
    }
    EXPECT_EQ(calls->load(), 1);
    EXPECT_EQ(first.rows, 4u);
    EXPECT_EQ(first.dim, 8u);
    EXPECT_TRUE(std::equal(first.row(0), first.row(0) + 8, first.row(2)));
    Gateway replay(config(Mode::strict_replay, dir.path()), nullptr);
    EXPECT_EQ(replay.embed(texts), first);
}

TEST(EmbeddingStore, BinaryRoundTrip) {
    TempDir dir("emb");
    EmbeddingMatrix m;
    m.rows = 3;
    m.dim = 2;
    m.values = {1.0, -2.5, 1e-300, 3.14159, -0.0, 42.0};
    m.input_hashes = {sha256_hex("a"), sha256_hex("b"), sha256_hex("c")};
    save_embeddings(m, dir / "m.bin");
    EXPECT_EQ(load_embeddings(dir / "m.bin"), m);
    const auto manifest = read_text(dir / "m.bin.csv");
    EXPECT_EQ(manifest.rfind("row,input_hash\n0," + sha256_hex("a") + "\n", 0), 0u);

    write_text(dir / "bad.bin", "garbage");
    EXPECT_THROW(load_embeddings(dir / "bad.bin"), DataError);
    m.values.pop_back();
    EXPECT_THROW(m.validate(), PreconditionError);
}
