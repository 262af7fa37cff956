#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>

namespace memaudit::metrics {

struct BaselineRates {
    /// 100 / number of distinct firms.
    double random = 0.0;
    /// Accuracy of always naming the firm with the most headlines (ties go to
    /// the alphabetically first ticker).
    double most_news = 0.0;
    std::string most_news_ticker;
    /// Accuracy of always naming `fixed_ticker`.
    double fixed = 0.0;
    std::size_t num_unique_firms = 0;
};

/// `panel` holds (actual ticker, headline count) pairs; repeated tickers are
/// summed. Tickers compare case-insensitively. Throws PreconditionError for
/// an empty panel or a zero total.
BaselineRates baseline_rates(std::span<const std::pair<std::string, std::size_t>> panel,
                             const std::string& fixed_ticker);

struct MaskingVerdict {
    bool future_invariance_refuted = false;
    bool detectable_skill = false;
    /// One-sided exact binomial p-value of the skill count against the baseline.
    double skill_p_value = 1.0;
    std::string note;
};

/// max(5, random baseline).
double default_epsilon(double random_baseline);

/// Rates in percent. Reconstruction above epsilon refutes invariance of the
/// masked task. Skill is detectable when an exact one-sided binomial test of
/// round(skill * n / 100) successes against the baseline rate rejects at
/// `alpha`. Throws PreconditionError for rates outside [0, 100], n = 0 or
/// alpha outside (0, 1).
MaskingVerdict masking_validity(double reconstruction_rate, double epsilon, double skill, double baseline,
                                std::size_t n, double alpha);

}  // namespace memaudit::metrics
