#pragma once

#include "memaudit/gateway/cache.hpp"
#include "memaudit/gateway/embedding_store.hpp"
#include "memaudit/gateway/reply.hpp"
#include "memaudit/gateway/transport.hpp"
#include "memaudit/prompt/render.hpp"

#include <atomic>
#include <chrono>
#include <cstddef>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace memaudit::gateway {

enum class Mode { live, replay, strict_replay };

Mode parse_mode(std::string_view text);
std::string_view to_string(Mode m);

/// Strict-replay lookup failed.
class CacheMissError : public std::runtime_error {
public:
    explicit CacheMissError(const std::string& digest)
        : std::runtime_error("replay cache miss for request digest " + digest), digest_(digest) {}
    const std::string& digest() const { return digest_; }

private:
    std::string digest_;
};

/// The per-run network request limit was reached.
class BudgetExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct GatewayConfig {
    Mode mode = Mode::strict_replay;
    std::string provider_tag = "default";
    std::string chat_model;
    std::string embedding_model;
    std::filesystem::path cache_dir;
    /// Hash of the template overrides; enters every chat digest.
    std::string template_hash;

    double requests_per_minute = 60.0;
    /// Token bucket capacity.
    int burst = 1;
    int max_retries = 3;
    std::chrono::milliseconds backoff_initial{1000};
    std::chrono::milliseconds backoff_max{30000};
    std::size_t max_in_flight = 4;
    /// Network calls allowed per run; unlimited when absent.
    std::optional<std::size_t> max_requests;
    /// Extra attempts after a malformed reply.
    int reask_budget = 1;
    std::size_t embedding_batch = 64;
};

struct ChatRequest {
    prompt::PromptBundle bundle;
    /// Overrides GatewayConfig::chat_model when non-empty.
    std::string model_id;
    /// Audits always run at temperature 0; anything else is rejected.
    double temperature = 0.0;
};

struct GatewayStats {
    std::size_t network_calls = 0;
    std::size_t cache_hits = 0;
    std::size_t reasks = 0;
};

/// Chat and embedding access through the replay cache.
///
/// live: cache first, then the network; every network reply is recorded.
/// replay: cache only; a chat miss becomes a refusal with cause "cache_miss".
/// strict-replay: cache only; a miss throws CacheMissError.
///
/// Thread-safe. `complete_all` keeps at most `max_in_flight` requests open.
class Gateway {
public:
    using Sleeper = std::function<void(std::chrono::milliseconds)>;

    /// `transport` may be null outside live mode.
    Gateway(GatewayConfig config, std::unique_ptr<Transport> transport);

    /// Replace the sleep used by the rate limiter and backoff (tests).
    void set_sleeper(Sleeper sleeper) { sleeper_ = std::move(sleeper); }

    /// Parsed per the bundle's schema. One re-ask after a malformed reply,
    /// then the reply stays a refusal. Transport failures after retries give a
    /// refusal with cause "transport_error"; credential problems throw
    /// ConfigError; the request limit throws BudgetExceeded.
    ModelReply complete(const ChatRequest& request);
    std::vector<ModelReply> complete_all(std::span<const ChatRequest> requests);

    /// One row per text in input order; rows are cached per text.
    EmbeddingMatrix embed(std::span<const std::string> texts);

    GatewayStats stats() const;
    /// Every digest looked up, sorted.
    std::vector<std::string> digests_used() const;
    const GatewayConfig& config() const { return config_; }

private:
    std::optional<std::string> fetch_chat(const std::string& model, const prompt::PromptBundle& bundle,
                                          int attempt, std::string& cause);
    nlohmann::json call(const std::string& path, const nlohmann::json& body);
    void take_token();
    void note_digest(const std::string& digest);

    GatewayConfig config_;
    std::unique_ptr<Transport> transport_;
    ReplayCache cache_;
    Sleeper sleeper_;

    std::atomic<std::size_t> network_calls_{0};
    std::atomic<std::size_t> cache_hits_{0};
    std::atomic<std::size_t> reasks_{0};

    mutable std::mutex mutex_;
    std::set<std::string> digests_;
    double tokens_ = 0.0;
    std::chrono::steady_clock::time_point last_refill_;
};

}  // namespace memaudit::gateway
