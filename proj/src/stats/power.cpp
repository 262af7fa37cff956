#include "memaudit/stats/power.hpp"

#include "memaudit/error.hpp"
#include "memaudit/stats/normal.hpp"

#include <cmath>

namespace memaudit::stats {

namespace {

void check(double p_post, std::size_t n_post, double alpha) {
    if (!(p_post >= 0.0 && p_post <= 1.0)) throw PreconditionError("p_post must be in [0, 1]");
    if (n_post < 1) throw PreconditionError("n_post must be at least 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw PreconditionError("alpha must be in (0, 1)");
}

}  // namespace

double gap_standard_error(double p_post, std::size_t n_post) {
    check(p_post, n_post, 0.5);
    return std::sqrt(p_post * (1.0 - p_post) / static_cast<double>(n_post));
}

double power_two_prop(const PowerSpec& s) {
    check(s.p_post, s.n_post, s.alpha);
    if (!std::isfinite(s.delta)) throw PreconditionError("delta must be finite");
    const double se = gap_standard_error(s.p_post, s.n_post);
    if (se == 0.0) return s.delta > 0.0 ? 1.0 : s.alpha;
    return normal_cdf(s.delta / se - normal_quantile(1.0 - s.alpha));
}

double min_detectable_gap(std::size_t n_post, double p_post, double alpha, double target_power) {
    check(p_post, n_post, alpha);
    if (!(target_power > 0.0 && target_power < 1.0)) throw PreconditionError("target power must be in (0, 1)");
    const double se = gap_standard_error(p_post, n_post);
    if (se == 0.0) throw PreconditionError("min_detectable_gap: p_post of 0 or 1 gives a zero standard error");
    return se * (normal_quantile(1.0 - alpha) + normal_quantile(target_power));
}

}  // namespace memaudit::stats
