#pragma once

#include "memaudit/calendar.hpp"
#include "memaudit/data/series.hpp"
#include "memaudit/gateway/gateway.hpp"
#include "memaudit/probe/report.hpp"
#include "memaudit/prompt/render.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace memaudit::report {

/// Every problem found in a config file, not just the first.
class ConfigValidationError : public std::runtime_error {
public:
    explicit ConfigValidationError(std::vector<std::string> errors);
    const std::vector<std::string>& errors() const { return errors_; }

private:
    std::vector<std::string> errors_;
};

struct ProviderConfig {
    std::string tag = "default";
    std::string base_url;
    std::string chat_model;
    std::string embedding_model;
    /// Environment variable holding the API key.
    std::string api_key_env = "MEMAUDIT_API_KEY";
    double requests_per_minute = 60.0;
    int burst = 1;
    std::size_t max_in_flight = 4;
    int max_retries = 3;
    double timeout_seconds = 60.0;
    /// The model's real training cutoff.
    std::optional<Date> model_cutoff;
};

struct SeriesEntry {
    data::SeriesSpec spec;
    std::filesystem::path path;
    /// Require a threshold and report threshold accuracy.
    bool threshold_accuracy = false;
};

struct SizePanelConfig {
    std::filesystem::path panel;
    /// One ticker per line (or a `ticker` column) defining the breakpoint universe.
    std::filesystem::path benchmark;
    /// `<TICKER>.csv` price files, monthly closing prices.
    std::filesystem::path prices_dir;
    int buckets = 5;
    int per_bucket = 50;
};

struct HeadlineConfig {
    std::filesystem::path path;
    bool want_level = false;
    /// Series providing next-trading-day levels when want_level is set.
    std::string level_series;
};

struct RecallConfig {
    std::vector<std::string> series;
    std::vector<std::size_t> context_depths{0};
    std::vector<std::string> direction;
    std::vector<std::string> pct_change;
    std::vector<std::pair<std::string, std::string>> relative;
    std::optional<HeadlineConfig> headlines;
    std::optional<SizePanelConfig> size_panel;
};

struct CutoffConfig {
    std::vector<std::string> series;
    Date fake_cutoff;
    std::optional<Date> current_date;
    std::vector<prompt::CutoffMode> modes;
};

struct MaskConfig {
    std::filesystem::path transcripts;
    std::optional<std::filesystem::path> industry_map;
    std::string fixed_ticker;
    std::optional<double> epsilon;
    double alpha = 0.05;
    /// Downstream task skill to test against its baseline; defaults to firm
    /// accuracy against the random baseline.
    std::optional<double> skill;
    std::optional<double> skill_baseline;
    std::optional<std::size_t> skill_n;
};

struct EmbedTarget {
    std::string series;
    /// e.g. "earliest estimate of the US GDP growth rate".
    std::string variable;
};

struct EmbedConfig {
    std::vector<EmbedTarget> targets;
    probe::ProbeConfig probe;
    std::size_t benchmark_window = 60;
};

struct PowerConfig {
    std::size_t n_post = 17;
    double p_post = 0.5;
    double alpha = 0.05;
    double target_power = 0.8;
    std::vector<double> deltas;
    std::vector<std::size_t> n_grid;
};

struct TheoryConfig {
    std::vector<std::string> labels{"up", "down"};
    std::string y_obs = "up";
};

struct AuditConfig {
    std::filesystem::path source;
    gateway::Mode mode = gateway::Mode::strict_replay;
    ProviderConfig provider;
    std::filesystem::path cache_dir;
    std::optional<std::filesystem::path> template_dir;
    prompt::PromptVariant variant = prompt::PromptVariant::standard;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> max_requests;
    int reask_budget = 1;
    std::optional<Date> cutoff_date;
    std::vector<SeriesEntry> series;

    std::optional<RecallConfig> recall;
    std::optional<CutoffConfig> cutoff;
    std::optional<MaskConfig> mask;
    std::optional<EmbedConfig> embed;
    std::optional<PowerConfig> power;
    std::optional<TheoryConfig> theory;

    /// SHA-256 of the effective configuration (after command-line overrides,
    /// without the output directory).
    std::string config_hash;
    nlohmann::json effective;

    const SeriesEntry& find_series(const std::string& name) const;
};

struct CliOverrides {
    std::optional<gateway::Mode> mode;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> max_requests;
};

/// Parse and check a JSON config. Relative paths resolve against the config
/// file's directory. Throws ConfigValidationError listing every problem.
AuditConfig validate_config(const std::filesystem::path& path, const CliOverrides& overrides = {});
AuditConfig validate_config_json(const nlohmann::json& j, const std::filesystem::path& base_dir,
                                 const CliOverrides& overrides = {});

}  // namespace memaudit::report
