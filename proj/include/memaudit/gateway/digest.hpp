#pragma once

#include "memaudit/prompt/render.hpp"

#include <string>
#include <string_view>

namespace memaudit::gateway {

/// Lower-case hex SHA-256.
std::string sha256_hex(std::string_view data);

/// Canonical form of a chat request: compact JSON with sorted keys
///   {"kind":"chat","model":...,"schema":...,"system":...,"temperature":0.0,
///    "templates":...,"user":...}
/// plus "attempt":k for re-asks (k > 0). `templates` is the override hash,
/// empty for the built-in templates.
std::string canonical_chat_request(std::string_view model_id, const prompt::PromptBundle& bundle,
                                   std::string_view template_hash, int attempt = 0);

/// SHA-256 of canonical_chat_request.
std::string chat_digest(std::string_view model_id, const prompt::PromptBundle& bundle,
                        std::string_view template_hash, int attempt = 0);

/// {"input":...,"kind":"embedding","model":...}
std::string canonical_embedding_request(std::string_view model_id, std::string_view input);
std::string embedding_digest(std::string_view model_id, std::string_view input);

}  // namespace memaudit::gateway
