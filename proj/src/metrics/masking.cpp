#include "memaudit/metrics/masking.hpp"

#include "memaudit/csv.hpp"
#include "memaudit/data/text.hpp"
#include "memaudit/error.hpp"
#include "memaudit/stats/tests.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

namespace memaudit::metrics {

BaselineRates baseline_rates(std::span<const std::pair<std::string, std::size_t>> panel,
                             const std::string& fixed_ticker) {
    if (panel.empty()) throw PreconditionError("baseline_rates: empty panel");
    std::map<std::string, std::size_t> counts;
    std::size_t total = 0;
    for (const auto& [ticker, n] : panel) {
        counts[data::upper(csv::trim(ticker))] += n;
        total += n;
    }
    if (total == 0) throw PreconditionError("baseline_rates: panel has no headlines");

    BaselineRates b;
    b.num_unique_firms = counts.size();
    b.random = 100.0 / static_cast<double>(counts.size());
    std::size_t best = 0;
    for (const auto& [ticker, n] : counts) {
        if (n > best) {
            best = n;
            b.most_news_ticker = ticker;
        }
    }
    b.most_news = 100.0 * static_cast<double>(best) / static_cast<double>(total);
    auto it = counts.find(data::upper(csv::trim(fixed_ticker)));
    b.fixed = it == counts.end() ? 0.0 : 100.0 * static_cast<double>(it->second) / static_cast<double>(total);
    return b;
}

double default_epsilon(double random_baseline) { return std::max(5.0, random_baseline); }

MaskingVerdict masking_validity(double reconstruction_rate, double epsilon, double skill, double baseline,
                                std::size_t n, double alpha) {
    for (double r : {reconstruction_rate, epsilon, skill, baseline}) {
        if (!(r >= 0.0 && r <= 100.0)) throw PreconditionError("masking_validity: rates must be in [0, 100]");
    }
    if (n == 0) throw PreconditionError("masking_validity: n must be positive");
    if (!(alpha > 0.0 && alpha < 1.0)) throw PreconditionError("masking_validity: alpha must be in (0, 1)");

    MaskingVerdict v;
    v.future_invariance_refuted = reconstruction_rate > epsilon;
    const auto k = static_cast<std::uint64_t>(std::llround(skill * static_cast<double>(n) / 100.0));
    v.skill_p_value = stats::binomial_upper_tail(k, n, baseline / 100.0);
    v.detectable_skill = skill > baseline && v.skill_p_value <= alpha;

    char buf[512];
    std::snprintf(buf, sizeof buf,
                  v.future_invariance_refuted
                      ? "Reconstruction rate %.2f%% exceeds epsilon %.2f%%: the masked task is not future-invariant."
                      : "Reconstruction rate %.2f%% does not exceed epsilon %.2f%%: future invariance is not refuted.",
                  reconstruction_rate, epsilon);
    v.note = buf;
    v.note +=
        " The reconstruction test is a lower bound: not refuted does not mean confirmed, since a stronger "
        "prompt or model may still recover the masked information.";
    char skill_buf[256];
    std::snprintf(skill_buf, sizeof skill_buf, " Skill %.2f%% vs baseline %.2f%% over n=%zu: one-sided p=%.4g (%s at alpha=%.3g).",
                  skill, baseline, n, v.skill_p_value, v.detectable_skill ? "detectable" : "not detectable", alpha);
    v.note += skill_buf;
    return v;
}

}  // namespace memaudit::metrics
