#pragma once

#include <cstddef>

namespace memaudit::stats {

/// One-sided test of a pre/post accuracy gap, delta = p_pre - p_post.
struct PowerSpec {
    double delta = 0.0;
    double p_post = 0.5;
    std::size_t n_post = 1;
    double alpha = 0.05;
};

/// sqrt(p(1-p)/n), the dominant term of the gap's standard error when the
/// pre-period sample is much larger than the post-period one.
double gap_standard_error(double p_post, std::size_t n_post);

/// Phi(delta / SE - z_{1-alpha}). With p_post in {0, 1} the standard error
/// vanishes: power is 1 for delta > 0 and alpha otherwise.
double power_two_prop(const PowerSpec& spec);

/// SE * (z_{1-alpha} + z_{power}). Throws PreconditionError for p_post in
/// {0, 1} (no finite gap is needed) or arguments out of range.
double min_detectable_gap(std::size_t n_post, double p_post, double alpha, double target_power);

}  // namespace memaudit::stats
