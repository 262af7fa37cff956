#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace memaudit::data {

struct PanelEntry {
    std::string ticker;
    int year = 0;
    std::optional<double> market_cap;
};

struct SampledAsset {
    std::string ticker;
    int year = 0;
    double market_cap = 0.0;
    int bucket = 0;  // 1-based, 1 = smallest

    bool operator==(const SampledAsset&) const = default;
};

struct YearBreakpoints {
    int year = 0;
    std::vector<double> breakpoints;  // buckets - 1 interior cut points

    bool operator==(const YearBreakpoints&) const = default;
};

struct SizeSample {
    std::vector<SampledAsset> assets;
    std::vector<YearBreakpoints> breakpoints;
    std::vector<std::string> warnings;
};

/// Linear-interpolation quantile of an unsorted sample, q in [0, 1].
double quantile(std::vector<double> values, double q);

/// Size-bucket sampling with benchmark-only breakpoints, drawn independently
/// each year. Breakpoints depend only on the benchmark caps; the seed only
/// affects which assets are drawn. Caps equal to a breakpoint fall in the
/// lower bucket. Rows without a market cap are skipped with a warning.
SizeSample size_bucket_sample(std::span<const PanelEntry> panel,
                              const std::set<std::string>& benchmark_subset, int buckets,
                              int per_bucket, std::uint64_t seed);

/// Reads `ticker,year,market_cap`.
std::vector<PanelEntry> load_panel(const std::filesystem::path& path);

}  // namespace memaudit::data
