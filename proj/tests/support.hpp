#pragma once

#include "memaudit/gateway/transport.hpp"
#include "memaudit/prompt/render.hpp"

#include <json.hpp>

#include <atomic>
#include <filesystem>
#include <functional>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

namespace memaudit::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag);
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

void write_text(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);

/// In-process provider. The handler sees (path, request body) and returns
/// the response body or throws TransportError.
class FakeTransport : public gateway::Transport {
public:
    using Handler = std::function<nlohmann::json(const std::string&, const nlohmann::json&)>;

    explicit FakeTransport(Handler handler, std::shared_ptr<std::atomic<int>> calls = nullptr)
        : handler_(std::move(handler)), calls_(calls ? calls : std::make_shared<std::atomic<int>>(0)) {}

    nlohmann::json post_json(const std::string& path, const nlohmann::json& body) override {
        ++*calls_;
        return handler_(path, body);
    }

    std::shared_ptr<std::atomic<int>> calls() const { return calls_; }

private:
    Handler handler_;
    std::shared_ptr<std::atomic<int>> calls_;
};

nlohmann::json chat_response(const std::string& content);
/// The user message of a chat request body.
std::string user_message(const nlohmann::json& body);

/// Deterministic embedding of a text, `dim` values in [-1, 1].
std::vector<double> hash_embedding(const std::string& text, std::size_t dim);
nlohmann::json embedding_response(const nlohmann::json& body, std::size_t dim);

/// Named rendered prompts covering every template family.
struct GoldenCase {
    std::string name;
    prompt::PromptBundle bundle;
};

std::vector<GoldenCase> golden_cases();
/// Stable text form of a bundle for snapshot files.
std::string golden_text(const prompt::PromptBundle& bundle);
std::filesystem::path golden_dir();

/// Deterministic stand-in for a chat model: the reply depends only on the
/// user message. The answer format follows the instruction in the message;
/// some replies are null, zero or prose so refusal paths get exercised.
std::string generic_reply(const std::string& user);
/// Chat via generic_reply, embeddings via hash_embedding.
FakeTransport::Handler generic_handler(std::size_t dim = 16);

/// Writes series, headline and transcript files plus `config.json`
/// (strict-replay, cache in `<dir>/cache`) and fills the cache with one live
/// run of every audit against generic_handler. Returns the config path.
std::filesystem::path make_fixture(const std::filesystem::path& dir);

}  // namespace memaudit::testing
