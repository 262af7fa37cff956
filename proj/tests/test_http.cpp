// Wire-level checks of the HTTP transport against a local server.

#include "memaudit/gateway/gateway.hpp"
#include "memaudit/gateway/transport.hpp"

#include <gtest/gtest.h>
#include <httplib.h>

#include <atomic>
#include <thread>

using namespace memaudit::gateway;
using nlohmann::json;

namespace {

class LocalServer {
public:
    LocalServer() {
        server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
            ++hits_;
            last_auth_ = req.get_header_value("Authorization");
            last_body_ = json::parse(req.body);
            const auto user = last_body_["messages"].back()["content"].get<std::string>();
            if (user == "unauthorized") {
                res.status = 401;
                return;
            }
            if (user == "overloaded") {
                res.status = 503;
                return;
            }
            if (user == "bad request") {
                res.status = 400;
                return;
            }
            json reply = {{"choices", {{{"message", {{"role", "assistant"}, {"content", R"({"answer": 1.5})"}}}}}}};
            res.set_content(reply.dump(), "application/json");
        });
        server_.Post("/v1/embeddings", [](const httplib::Request& req, httplib::Response& res) {
            const auto body = json::parse(req.body);
            json data = json::array();
            // Reverse order on the wire; the transport sorts by index.
            for (std::size_t i = body["input"].size(); i-- > 0;) {
                data.push_back({{"index", i}, {"embedding", {static_cast<double>(i), 1.0}}});
            }
            res.set_content(json{{"data", data}}.dump(), "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~LocalServer() {
        server_.stop();
        thread_.join();
    }

    std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
    std::atomic<int> hits_{0};
    std::string last_auth_;
    json last_body_;
};

}  // namespace

TEST(HttpTransport, ChatRoundTrip) {
    LocalServer srv;
    auto t = make_http_transport({srv.base_url(), "secret", 5.0});
    const auto resp = t->post_json("/chat/completions", chat_payload("m-1", "sys", "hello", 0.0));
    EXPECT_EQ(chat_content(resp), R"({"answer": 1.5})");
    EXPECT_EQ(srv.last_auth_, "Bearer secret");
    EXPECT_EQ(srv.last_body_["model"], "m-1");
    EXPECT_EQ(srv.last_body_["temperature"], 0.0);
    ASSERT_EQ(srv.last_body_["messages"].size(), 2u);
    EXPECT_EQ(srv.last_body_["messages"][0]["role"], "system");
}

TEST(HttpTransport, EmptySystemMessageIsOmitted) {
    LocalServer srv;
    auto t = make_http_transport({srv.base_url(), "k", 5.0});
    t->post_json("/chat/completions", chat_payload("m", "", "hello", 0.0));
    ASSERT_EQ(srv.last_body_["messages"].size(), 1u);
    EXPECT_EQ(srv.last_body_["messages"][0]["role"], "user");
}

TEST(HttpTransport, StatusClassification) {
    LocalServer srv;
    auto t = make_http_transport({srv.base_url(), "k", 5.0});
    EXPECT_THROW(t->post_json("/chat/completions", chat_payload("m", "", "unauthorized", 0.0)), ConfigError);
    try {
        t->post_json("/chat/completions", chat_payload("m", "", "overloaded", 0.0));
        FAIL();
    } catch (const TransportError& e) {
        EXPECT_EQ(e.status(), 503);
        EXPECT_TRUE(e.retryable());
    }
    try {
        t->post_json("/chat/completions", chat_payload("m", "", "bad request", 0.0));
        FAIL();
    } catch (const TransportError& e) {
        EXPECT_EQ(e.status(), 400);
        EXPECT_FALSE(e.retryable());
    }
}

TEST(HttpTransport, ConnectionFailureIsRetryable) {
    int port = 0;
    {
        httplib::Server probe;
        port = probe.bind_to_any_port("127.0.0.1");
    }
    auto t = make_http_transport({"http://127.0.0.1:" + std::to_string(port) + "/v1", "k", 1.0});
    try {
        t->post_json("/chat/completions", chat_payload("m", "", "x", 0.0));
        FAIL();
    } catch (const TransportError& e) {
        EXPECT_TRUE(e.retryable());
    }
    EXPECT_THROW(make_http_transport({"no-scheme/v1", "k", 1.0}), ConfigError);
}

TEST(HttpTransport, EmbeddingsAreOrderedByIndex) {
    LocalServer srv;
    auto t = make_http_transport({srv.base_url(), "k", 5.0});
    const auto rows = embedding_rows(t->post_json("/embeddings", embedding_payload("e", {"a", "b", "c"})), 3);
    ASSERT_EQ(rows.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(rows[i][0], static_cast<double>(i));
}

TEST(HttpTransport, GatewayRetriesOverTheWire) {
    LocalServer srv;
    GatewayConfig cfg;
    cfg.mode = Mode::live;
    cfg.chat_model = "m";
    cfg.requests_per_minute = 1e9;
    cfg.burst = 10;
    cfg.max_retries = 2;
    Gateway g(cfg, make_http_transport({srv.base_url(), "k", 5.0}));
    g.set_sleeper([](std::chrono::milliseconds) {});
    memaudit::prompt::PromptBundle b;
    b.user_message = "overloaded";
    const auto r = g.complete({b, "", 0.0});
    EXPECT_EQ(r.cause, "transport_error");
    EXPECT_EQ(srv.hits_.load(), 3);
    b.user_message = "fine";
    EXPECT_DOUBLE_EQ(*g.complete({b, "", 0.0}).answer_numeric, 1.5);
}
