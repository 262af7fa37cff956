#pragma once

#include <json.hpp>

#include <memory>
#include <stdexcept>
#include <string>

namespace memaudit::gateway {

/// A failed exchange. `retryable` is set for connection errors, timeouts,
/// HTTP 429 and 5xx.
class TransportError : public std::runtime_error {
public:
    TransportError(const std::string& what, int status, bool retryable)
        : std::runtime_error(what), status_(status), retryable_(retryable) {}
    int status() const { return status_; }
    bool retryable() const { return retryable_; }

private:
    int status_;
    bool retryable_;
};

/// Missing endpoint, credentials or other setup needed to reach a provider.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// POSTs a JSON body to a path under the provider's base URL and returns the
/// decoded JSON response. Implementations must be safe to call concurrently.
class Transport {
public:
    virtual ~Transport() = default;
    virtual nlohmann::json post_json(const std::string& path, const nlohmann::json& body) = 0;
};

struct HttpEndpoint {
    /// e.g. "https://api.example.com/v1"; paths are appended to it.
    std::string base_url;
    std::string api_key;
    double timeout_seconds = 60.0;
};

/// Plain HTTP(S) transport with Bearer authentication.
std::unique_ptr<Transport> make_http_transport(const HttpEndpoint& endpoint);

/// Chat-completion request body and reply extraction for the common wire shape.
nlohmann::json chat_payload(const std::string& model_id, const std::string& system_message,
                            const std::string& user_message, double temperature);
/// `choices[0].message.content`; throws TransportError (not retryable) if absent.
std::string chat_content(const nlohmann::json& response);

nlohmann::json embedding_payload(const std::string& model_id, const std::vector<std::string>& inputs);
/// `data[i].embedding` ordered by `data[i].index`.
std::vector<std::vector<double>> embedding_rows(const nlohmann::json& response, std::size_t expected);

}  // namespace memaudit::gateway
