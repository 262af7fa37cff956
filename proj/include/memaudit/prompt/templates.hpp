#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace memaudit::prompt {

using Vars = std::map<std::string, std::string, std::less<>>;

/// Named prompt templates with `{placeholder}` substitution.
///
/// The built-in set reproduces the audit prompts verbatim. An override
/// directory may replace any template with a file named `<key>.txt` (one
/// trailing newline is stripped). Overridden templates change the hash that
/// enters every request digest, so cached replies never cross template
/// versions.
class TemplateSet {
public:
    static const TemplateSet& defaults();

    /// Built-ins overlaid with `<dir>/<key>.txt`. Unknown keys are rejected.
    static TemplateSet with_overrides(const std::filesystem::path& dir);

    const std::string& get(std::string_view key) const;

    /// Substitute every `{name}` in the template. Substituted values are not
    /// rescanned. Throws PreconditionError for a placeholder without a value.
    std::string render(std::string_view key, const Vars& vars) const;

    /// Empty for the built-in set; otherwise a SHA-256 hex digest over the
    /// overridden (key, text) pairs in key order.
    const std::string& override_hash() const { return override_hash_; }

    std::vector<std::string> keys() const;

private:
    TemplateSet() = default;

    std::map<std::string, std::string, std::less<>> templates_;
    std::string override_hash_;
};

/// Placeholder substitution on an arbitrary template string.
std::string substitute(std::string_view text, const Vars& vars);

}  // namespace memaudit::prompt
