#include "memaudit/gateway/cache.hpp"

#include "memaudit/error.hpp"

#include <json.hpp>
#include <spdlog/spdlog.h>

#include <chrono>
#include <ctime>

namespace memaudit::gateway {

using nlohmann::json;

namespace {

std::string utc_now() {
    auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

ReplayCache::ReplayCache(std::filesystem::path dir, std::string provider_tag)
    : provider_tag_(std::move(provider_tag)) {
    if (provider_tag_.empty() || provider_tag_.find_first_of("/\\") != std::string::npos) {
        throw PreconditionError("invalid provider tag '" + provider_tag_ + "'");
    }
    if (dir.empty()) return;
    std::filesystem::create_directories(dir);
    file_ = dir / (provider_tag_ + ".jsonl");

    std::ifstream in(file_);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto j = json::parse(line, nullptr, false);
        try {
            if (j.is_discarded() || !j.is_object()) throw std::runtime_error("not a JSON object");
            const auto digest = j.at("digest").get<std::string>();
            const auto kind = j.at("kind").get<std::string>();
            if (kind == "chat") {
                chat_[digest] = j.at("raw_text").get<std::string>();
            } else if (kind == "embedding") {
                embeddings_[digest] = j.at("embedding").get<std::vector<double>>();
            } else {
                throw std::runtime_error("unknown kind");
            }
        } catch (const std::exception& e) {
            ++corrupt_lines_;
            spdlog::warn("cache {}: skipping line {}: {}", file_.string(), lineno, e.what());
        }
    }
    in.close();
    out_.open(file_, std::ios::app | std::ios::binary);
    if (!out_) throw DataError("cannot open cache file for append: '" + file_.string() + "'");
}

std::optional<std::string> ReplayCache::chat(const std::string& digest) const {
    std::shared_lock lock(mutex_);
    auto it = chat_.find(digest);
    if (it == chat_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::vector<double>> ReplayCache::embedding(const std::string& digest) const {
    std::shared_lock lock(mutex_);
    auto it = embeddings_.find(digest);
    if (it == embeddings_.end()) return std::nullopt;
    return it->second;
}

void ReplayCache::append(const std::string& line) {
    if (!out_.is_open()) return;
    out_ << line << '\n';
    out_.flush();
    if (!out_) throw DataError("write to cache file failed: '" + file_.string() + "'");
}

void ReplayCache::record_chat(const std::string& digest, const std::string& raw_text) {
    json j{{"digest", digest}, {"provider_tag", provider_tag_}, {"created_at", utc_now()},
           {"kind", "chat"}, {"raw_text", raw_text}};
    std::unique_lock lock(mutex_);
    chat_[digest] = raw_text;
    append(j.dump());
}

void ReplayCache::record_embedding(const std::string& digest, const std::vector<double>& values) {
    json j{{"digest", digest}, {"provider_tag", provider_tag_}, {"created_at", utc_now()},
           {"kind", "embedding"}, {"embedding", values}};
    std::unique_lock lock(mutex_);
    embeddings_[digest] = values;
    append(j.dump());
}

std::size_t ReplayCache::size() const {
    std::shared_lock lock(mutex_);
    return chat_.size() + embeddings_.size();
}

}  // namespace memaudit::gateway
