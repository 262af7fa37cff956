#include "memaudit/gateway/digest.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <array>
#include <stdexcept>

namespace memaudit::gateway {

std::string sha256_hex(std::string_view data) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 computation failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 0x0f]);
    }
    return out;
}

std::string canonical_chat_request(std::string_view model_id, const prompt::PromptBundle& bundle,
                                   std::string_view template_hash, int attempt) {
    // nlohmann::json objects keep keys sorted, so dump() is canonical.
    nlohmann::json j;
    j["kind"] = "chat";
    j["model"] = model_id;
    j["system"] = bundle.system_message;
    j["user"] = bundle.user_message;
    j["temperature"] = 0.0;
    j["schema"] = prompt::to_string(bundle.answer_schema);
    j["templates"] = template_hash;
    if (attempt > 0) j["attempt"] = attempt;
    return j.dump();
}

std::string chat_digest(std::string_view model_id, const prompt::PromptBundle& bundle,
                        std::string_view template_hash, int attempt) {
    return sha256_hex(canonical_chat_request(model_id, bundle, template_hash, attempt));
}

std::string canonical_embedding_request(std::string_view model_id, std::string_view input) {
    nlohmann::json j;
    j["kind"] = "embedding";
    j["model"] = model_id;
    j["input"] = input;
    return j.dump();
}

std::string embedding_digest(std::string_view model_id, std::string_view input) {
    return sha256_hex(canonical_embedding_request(model_id, input));
}

}  // namespace memaudit::gateway
