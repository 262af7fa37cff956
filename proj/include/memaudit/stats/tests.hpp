#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>

namespace memaudit::stats {

double mean(std::span<const double> x);
/// Sample standard deviation (n - 1 denominator).
double sample_sd(std::span<const double> x);

/// Pearson correlation. Empty when either input is constant. Throws
/// PreconditionError for unequal lengths or fewer than 3 points.
std::optional<double> correlation(std::span<const double> x, std::span<const double> y);

/// Correlations among (1) actuals, (2) model predictions, (3) benchmark.
struct CorrTriple {
    double r12 = 0.0;
    double r13 = 0.0;
    double r23 = 0.0;
    std::size_t n = 0;
};

struct TStat {
    double t = 0.0;
    double df = 0.0;
};

/// Williams' t for H0: r12 = r13 (Steiger's form), df = n - 3. Exactly 0
/// when r12 == r13. Empty when the denominator is not positive. Throws
/// PreconditionError for n < 4, correlations outside [-1, 1] or a triple
/// whose correlation matrix is not positive semidefinite.
std::optional<TStat> williams_t(const CorrTriple& triple);

/// One-sample t of the mean against zero; empty when the sample standard
/// deviation is zero. Throws PreconditionError for fewer than 2 values.
std::optional<TStat> paired_mean_t(std::span<const double> diffs);

/// P(T > t) for Student's t with `df` degrees of freedom.
double student_t_sf(double t, double df);

/// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);

/// P(X >= k) for X ~ Binomial(n, p).
double binomial_upper_tail(std::uint64_t k, std::uint64_t n, double p);

}  // namespace memaudit::stats
