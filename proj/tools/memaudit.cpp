// memaudit: run one audit from a config file and write its report bundle.
//
// Exit status: 0 on success (refusals included), 1 on a hard error or a run
// stopped at the request limit, 2 on an invalid config or command line.

#include "memaudit/gateway/gateway.hpp"
#include "memaudit/report/audit.hpp"
#include "memaudit/report/config.hpp"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <cstdio>
#include <iostream>

int main(int argc, char** argv) {
    using namespace memaudit;

    CLI::App app{"Audit a language model for memorized time-series and text data."};
    app.set_version_flag("--version", std::string(report::kToolkitVersion));

    std::string subcommand;
    std::string config_path;
    std::string mode;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> max_requests;
    bool verbose = false;

    app.add_option("subcommand", subcommand, "recall, cutoff, mask, embed, power or theory-demo")
        ->required()
        ->check(CLI::IsMember({"recall", "cutoff", "mask", "embed", "power", "theory-demo"}));
    app.add_option("--config", config_path, "JSON config file")->required();
    app.add_option("--mode", mode, "live, replay or strict-replay (overrides the config)")
        ->check(CLI::IsMember({"live", "replay", "strict-replay"}));
    app.add_option("--out", out_dir, "output directory")->capture_default_str();
    app.add_option("--seed", seed, "seed for sampling and placebo steps (overrides the config)");
    app.add_option("--max-requests", max_requests, "network request limit for this run");
    app.add_flag("-v,--verbose", verbose, "debug logging");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::warn);

    report::AuditConfig config;
    try {
        report::CliOverrides overrides;
        if (!mode.empty()) overrides.mode = gateway::parse_mode(mode);
        overrides.seed = seed;
        overrides.max_requests = max_requests;
        config = report::validate_config(config_path, overrides);
    } catch (const report::ConfigValidationError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }

    try {
        report::AuditOptions options;
        options.out_dir = out_dir;
        auto result = report::run_audit(config, report::parse_subcommand(subcommand), std::move(options));
        std::cout << "wrote " << out_dir << " (" << result.refusals << " refusal(s), "
                  << result.gateway.network_calls << " network call(s), " << result.gateway.cache_hits
                  << " cache hit(s))\n";
        if (result.partial) {
            std::cerr << "request limit reached; the bundle is partial\n";
            return 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
