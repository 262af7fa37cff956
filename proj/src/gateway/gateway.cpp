#include "memaudit/gateway/gateway.hpp"

#include "memaudit/error.hpp"
#include "memaudit/gateway/digest.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <thread>

namespace memaudit::gateway {

using nlohmann::json;

Mode parse_mode(std::string_view text) {
    if (text == "live") return Mode::live;
    if (text == "replay") return Mode::replay;
    if (text == "strict-replay" || text == "strict_replay") return Mode::strict_replay;
    throw PreconditionError("unknown mode '" + std::string(text) + "' (expected live, replay or strict-replay)");
}

std::string_view to_string(Mode m) {
    switch (m) {
        case Mode::live: return "live";
        case Mode::replay: return "replay";
        case Mode::strict_replay: return "strict-replay";
    }
    return "strict-replay";
}

Gateway::Gateway(GatewayConfig config, std::unique_ptr<Transport> transport)
    : config_(std::move(config)),
      transport_(std::move(transport)),
      cache_(config_.cache_dir, config_.provider_tag),
      sleeper_([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }),
      last_refill_(std::chrono::steady_clock::now()) {
    if (config_.mode == Mode::live && !transport_) {
        throw ConfigError("live mode requires a provider endpoint");
    }
    if (config_.requests_per_minute <= 0.0) throw ConfigError("requests_per_minute must be positive");
    if (config_.burst < 1) throw ConfigError("burst must be >= 1");
    if (config_.max_in_flight < 1) throw ConfigError("max_in_flight must be >= 1");
    if (cache_.corrupt_lines() > 0) {
        spdlog::warn("replay cache has {} unreadable line(s); those entries are ignored", cache_.corrupt_lines());
    }
}

void Gateway::note_digest(const std::string& digest) {
    std::lock_guard lock(mutex_);
    digests_.insert(digest);
}

void Gateway::take_token() {
    // Generic cell rate: `last_refill_` holds the theoretical arrival time of
    // the next request; up to `burst` requests may run ahead of it.
    using namespace std::chrono;
    const auto interval = duration_cast<steady_clock::duration>(duration<double>(60.0 / config_.requests_per_minute));
    steady_clock::duration wait{0};
    {
        std::lock_guard lock(mutex_);
        const auto now = steady_clock::now();
        const auto tolerance = interval * (config_.burst - 1);
        const auto tat = std::max(last_refill_, now);
        if (tat - tolerance > now) wait = tat - tolerance - now;
        last_refill_ = tat + interval;
    }
    if (wait > steady_clock::duration::zero()) sleeper_(ceil<milliseconds>(wait));
}

json Gateway::call(const std::string& path, const json& body) {
    if (!transport_) throw ConfigError("no transport configured");
    for (int attempt = 0;; ++attempt) {
        const auto used = network_calls_.fetch_add(1) + 1;
        if (config_.max_requests && used > *config_.max_requests) {
            network_calls_.fetch_sub(1);
            throw BudgetExceeded("request limit of " + std::to_string(*config_.max_requests) + " reached");
        }
        take_token();
        try {
            return transport_->post_json(path, body);
        } catch (const TransportError& e) {
            if (!e.retryable() || attempt >= config_.max_retries) throw;
            std::chrono::milliseconds delay = config_.backoff_initial * (1LL << std::min(attempt, 30));
            delay = std::min(delay, config_.backoff_max);
            spdlog::warn("{}; retrying in {} ms", e.what(), delay.count());
            sleeper_(delay);
        }
    }
}

std::optional<std::string> Gateway::fetch_chat(const std::string& model, const prompt::PromptBundle& bundle,
                                               int attempt, std::string& cause) {
    const auto digest = chat_digest(model, bundle, config_.template_hash, attempt);
    note_digest(digest);
    if (auto hit = cache_.chat(digest)) {
        ++cache_hits_;
        return hit;
    }
    switch (config_.mode) {
        case Mode::strict_replay:
            throw CacheMissError(digest);
        case Mode::replay:
            cause = "cache_miss";
            return std::nullopt;
        case Mode::live:
            break;
    }
    try {
        auto response = call("/chat/completions",
                             chat_payload(model, bundle.system_message, bundle.user_message, 0.0));
        auto text = chat_content(response);
        cache_.record_chat(digest, text);
        return text;
    } catch (const TransportError& e) {
        spdlog::error("chat request {} failed: {}", digest.substr(0, 12), e.what());
        cause = "transport_error";
        return std::nullopt;
    }
}

ModelReply Gateway::complete(const ChatRequest& request) {
    if (request.temperature != 0.0) throw PreconditionError("audit requests must use temperature 0");
    if (request.bundle.user_message.empty()) throw PreconditionError("empty user message");
    const std::string& model = request.model_id.empty() ? config_.chat_model : request.model_id;
    if (model.empty()) throw ConfigError("no chat model configured");

    ModelReply reply;
    for (int attempt = 0; attempt <= config_.reask_budget; ++attempt) {
        if (attempt > 0) ++reasks_;
        std::string cause;
        auto raw = fetch_chat(model, request.bundle, attempt, cause);
        if (!raw) {
            ModelReply failed;
            failed.refusal = true;
            failed.status = ParseStatus::refusal;
            failed.cause = cause;
            return failed;
        }
        reply = parse_reply(*raw, request.bundle.answer_schema);
        if (reply.status != ParseStatus::malformed) break;
    }
    return reply;
}

std::vector<ModelReply> Gateway::complete_all(std::span<const ChatRequest> requests) {
    std::vector<ModelReply> out(requests.size());
    if (requests.empty()) return out;
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const auto i = next.fetch_add(1);
            if (i >= requests.size()) return;
            try {
                out[i] = complete(requests[i]);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next = requests.size();
                return;
            }
        }
    };
    const auto n_workers = std::min(config_.max_in_flight, requests.size());
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    }
    if (error) std::rethrow_exception(error);
    return out;
}

EmbeddingMatrix Gateway::embed(std::span<const std::string> texts) {
    if (texts.empty()) throw PreconditionError("embed: no input texts");
    if (config_.embedding_model.empty()) throw ConfigError("no embedding model configured");

    std::vector<std::string> digests;
    std::vector<std::optional<std::vector<double>>> rows(texts.size());
    std::vector<std::size_t> missing;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        digests.push_back(embedding_digest(config_.embedding_model, texts[i]));
        note_digest(digests.back());
        rows[i] = cache_.embedding(digests.back());
        if (rows[i]) {
            ++cache_hits_;
        } else {
            missing.push_back(i);
        }
    }
    if (!missing.empty() && config_.mode != Mode::live) throw CacheMissError(digests[missing.front()]);

    // Fetch each distinct missing text once.
    std::vector<std::size_t> unique_missing;
    std::set<std::string> queued;
    for (auto i : missing) {
        if (queued.insert(digests[i]).second) unique_missing.push_back(i);
    }
    for (std::size_t start = 0; start < unique_missing.size(); start += config_.embedding_batch) {
        const auto end = std::min(unique_missing.size(), start + config_.embedding_batch);
        std::vector<std::string> batch;
        for (auto k = start; k < end; ++k) batch.push_back(texts[unique_missing[k]]);
        auto fetched = embedding_rows(call("/embeddings", embedding_payload(config_.embedding_model, batch)),
                                      batch.size());
        for (auto k = start; k < end; ++k) cache_.record_embedding(digests[unique_missing[k]], fetched[k - start]);
    }
    for (auto i : missing) rows[i] = cache_.embedding(digests[i]);

    EmbeddingMatrix m;
    m.rows = texts.size();
    m.dim = rows.front()->size();
    for (std::size_t i = 0; i < texts.size(); ++i) {
        if (rows[i]->size() != m.dim) throw DataError("embedding rows have different dimensions");
        m.values.insert(m.values.end(), rows[i]->begin(), rows[i]->end());
        m.input_hashes.push_back(sha256_hex(texts[i]));
    }
    m.validate();
    return m;
}

GatewayStats Gateway::stats() const {
    return {network_calls_.load(), cache_hits_.load(), reasks_.load()};
}

std::vector<std::string> Gateway::digests_used() const {
    std::lock_guard lock(mutex_);
    return {digests_.begin(), digests_.end()};
}

}  // namespace memaudit::gateway
