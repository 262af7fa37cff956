#pragma once

#include "memaudit/gateway/gateway.hpp"
#include "memaudit/report/config.hpp"

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>

namespace memaudit::report {

inline constexpr std::string_view kToolkitName = "memaudit";
inline constexpr std::string_view kToolkitVersion = "0.1.0";

enum class Subcommand { recall, cutoff, mask, embed, power, theory_demo };

Subcommand parse_subcommand(std::string_view text);
std::string_view to_string(Subcommand s);

struct AuditOptions {
    std::filesystem::path out_dir;
    /// Replaces the HTTP transport (tests, fake providers). Live mode without
    /// it builds one from the provider section and the API key variable.
    std::unique_ptr<gateway::Transport> transport;
    /// Replaces the gateway's sleep.
    gateway::Gateway::Sleeper sleeper;
};

struct AuditResult {
    /// Stopped early at the request limit; the bundle holds what finished.
    bool partial = false;
    std::size_t refusals = 0;
    gateway::GatewayStats gateway;
};

/// Runs one audit and writes its bundle (tables, rows, plots, report.md,
/// manifest.json) under `options.out_dir`. Refusals never fail a run. Throws
/// CacheMissError in strict-replay mode, ConfigError for missing sections or
/// credentials, DataError for unreadable inputs.
AuditResult run_audit(const AuditConfig& config, Subcommand subcommand, AuditOptions options);

}  // namespace memaudit::report
