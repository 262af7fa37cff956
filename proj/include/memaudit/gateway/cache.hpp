#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

namespace memaudit::gateway {

/// Append-only JSONL replay cache, one entry per line:
///   {"digest":..., "provider_tag":..., "created_at":..., "kind":"chat", "raw_text":...}
///   {"digest":..., "provider_tag":..., "created_at":..., "kind":"embedding", "embedding":[...]}
/// Stored under `<dir>/<provider_tag>.jsonl`. A line that fails to parse is
/// skipped and counted; the rest of the file stays usable. Later entries for
/// the same digest win. An empty directory keeps the cache in memory only.
///
/// Lookups take a shared lock; appends take the exclusive lock and flush each
/// line before releasing it.
class ReplayCache {
public:
    ReplayCache(std::filesystem::path dir, std::string provider_tag);

    std::optional<std::string> chat(const std::string& digest) const;
    std::optional<std::vector<double>> embedding(const std::string& digest) const;

    void record_chat(const std::string& digest, const std::string& raw_text);
    void record_embedding(const std::string& digest, const std::vector<double>& values);

    std::size_t size() const;
    std::size_t corrupt_lines() const { return corrupt_lines_; }
    const std::filesystem::path& file() const { return file_; }
    const std::string& provider_tag() const { return provider_tag_; }

private:
    void append(const std::string& line);

    std::filesystem::path file_;
    std::string provider_tag_;
    std::map<std::string, std::string> chat_;
    std::map<std::string, std::vector<double>> embeddings_;
    std::size_t corrupt_lines_ = 0;
    mutable std::shared_mutex mutex_;
    std::ofstream out_;
};

}  // namespace memaudit::gateway
