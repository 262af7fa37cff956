#include "memaudit/gateway/transport.hpp"

#include <httplib.h>

#include <cmath>
#include <mutex>

namespace memaudit::gateway {

using nlohmann::json;

namespace {

class HttpTransport final : public Transport {
public:
    explicit HttpTransport(const HttpEndpoint& ep) : api_key_(ep.api_key), timeout_(ep.timeout_seconds) {
        // Split "scheme://host[:port]/prefix" into the client origin and a path prefix.
        const auto scheme_end = ep.base_url.find("://");
        if (scheme_end == std::string::npos) {
            throw ConfigError("endpoint URL must include a scheme: '" + ep.base_url + "'");
        }
        const auto path_start = ep.base_url.find('/', scheme_end + 3);
        origin_ = ep.base_url.substr(0, path_start);
        if (path_start != std::string::npos) prefix_ = ep.base_url.substr(path_start);
        while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
    }

    json post_json(const std::string& path, const json& body) override {
        httplib::Client client(origin_);
        const auto secs = static_cast<time_t>(timeout_);
        const auto usecs = static_cast<time_t>((timeout_ - std::floor(timeout_)) * 1e6);
        client.set_connection_timeout(secs, usecs);
        client.set_read_timeout(secs, usecs);
        client.set_write_timeout(secs, usecs);
        httplib::Headers headers;
        if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

        auto res = client.Post(prefix_ + path, headers, body.dump(), "application/json");
        if (!res) {
            throw TransportError("request to " + origin_ + prefix_ + path + " failed: " +
                                     httplib::to_string(res.error()),
                                 0, true);
        }
        if (res->status == 401 || res->status == 403) {
            throw ConfigError("provider rejected credentials (HTTP " + std::to_string(res->status) + ")");
        }
        if (res->status < 200 || res->status >= 300) {
            const bool retryable = res->status == 429 || res->status >= 500;
            throw TransportError("HTTP " + std::to_string(res->status) + " from " + prefix_ + path,
                                 res->status, retryable);
        }
        auto j = json::parse(res->body, nullptr, false);
        if (j.is_discarded()) throw TransportError("response body is not JSON", res->status, false);
        return j;
    }

private:
    std::string origin_;
    std::string prefix_;
    std::string api_key_;
    double timeout_;
};

}  // namespace

std::unique_ptr<Transport> make_http_transport(const HttpEndpoint& endpoint) {
    return std::make_unique<HttpTransport>(endpoint);
}

json chat_payload(const std::string& model_id, const std::string& system_message,
                  const std::string& user_message, double temperature) {
    json messages = json::array();
    if (!system_message.empty()) messages.push_back({{"role", "system"}, {"content", system_message}});
    messages.push_back({{"role", "user"}, {"content", user_message}});
    return {{"model", model_id}, {"messages", messages}, {"temperature", temperature}};
}

std::string chat_content(const json& response) {
    try {
        const auto& content = response.at("choices").at(0).at("message").at("content");
        if (content.is_null()) return {};
        return content.get<std::string>();
    } catch (const json::exception& e) {
        throw TransportError(std::string("unexpected chat response shape: ") + e.what(), 200, false);
    }
}

json embedding_payload(const std::string& model_id, const std::vector<std::string>& inputs) {
    return {{"model", model_id}, {"input", inputs}};
}

std::vector<std::vector<double>> embedding_rows(const json& response, std::size_t expected) {
    std::vector<std::vector<double>> rows(expected);
    std::vector<bool> seen(expected, false);
    try {
        const auto& data = response.at("data");
        for (std::size_t i = 0; i < data.size(); ++i) {
            const auto& item = data.at(i);
            std::size_t index = item.contains("index") ? item.at("index").get<std::size_t>() : i;
            if (index >= expected || seen[index]) throw TransportError("bad embedding index", 200, false);
            rows[index] = item.at("embedding").get<std::vector<double>>();
            seen[index] = true;
        }
    } catch (const json::exception& e) {
        throw TransportError(std::string("unexpected embedding response shape: ") + e.what(), 200, false);
    }
    for (bool s : seen) {
        if (!s) throw TransportError("embedding response is missing rows", 200, false);
    }
    return rows;
}

}  // namespace memaudit::gateway
