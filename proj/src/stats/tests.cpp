#include "memaudit/stats/tests.hpp"

#include "memaudit/error.hpp"

#include <cmath>
#include <string>

namespace memaudit::stats {

double mean(std::span<const double> x) {
    if (x.empty()) throw PreconditionError("mean of empty sample");
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

double sample_sd(std::span<const double> x) {
    if (x.size() < 2) throw PreconditionError("standard deviation needs at least 2 values");
    const double m = mean(x);
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

std::optional<double> correlation(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw PreconditionError("correlation: inputs differ in length");
    if (x.size() < 3) throw PreconditionError("correlation: need at least 3 points");
    const double mx = mean(x), my = mean(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return std::nullopt;
    double r = sxy / std::sqrt(sxx * syy);
    if (r > 1.0) r = 1.0;
    if (r < -1.0) r = -1.0;
    return r;
}

std::optional<TStat> williams_t(const CorrTriple& c) {
    if (c.n < 4) throw PreconditionError("williams_t: n must be at least 4");
    for (double r : {c.r12, c.r13, c.r23}) {
        if (!(r >= -1.0 && r <= 1.0)) throw PreconditionError("williams_t: correlation outside [-1, 1]");
    }
    const double n = static_cast<double>(c.n);
    const TStat zero{0.0, n - 3.0};
    if (c.r12 == c.r13) return zero;

    const double K = 1.0 - c.r12 * c.r12 - c.r13 * c.r13 - c.r23 * c.r23 + 2.0 * c.r12 * c.r13 * c.r23;
    if (K < -1e-12) throw PreconditionError("williams_t: correlations are not jointly consistent");
    const double rbar = 0.5 * (c.r12 + c.r13);
    const double one_minus = 1.0 - c.r23;
    const double denom = 2.0 * K * (n - 1.0) / (n - 3.0) + rbar * rbar * one_minus * one_minus * one_minus;
    if (!(denom > 0.0)) return std::nullopt;
    const double t = (c.r12 - c.r13) * std::sqrt((n - 1.0) * (1.0 + c.r23) / denom);
    if (!std::isfinite(t)) return std::nullopt;
    return TStat{t, n - 3.0};
}

std::optional<TStat> paired_mean_t(std::span<const double> diffs) {
    if (diffs.size() < 2) throw PreconditionError("paired_mean_t: need at least 2 differences");
    const double sd = sample_sd(diffs);
    if (sd == 0.0) return std::nullopt;
    const double n = static_cast<double>(diffs.size());
    return TStat{mean(diffs) / (sd / std::sqrt(n)), n - 1.0};
}

namespace {

// Continued fraction for the incomplete beta (modified Lentz).
double beta_cf(double a, double b, double x) {
    constexpr double tiny = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 1000; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) break;
    }
    return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0 && b > 0.0)) throw PreconditionError("incomplete_beta: a and b must be positive");
    if (!(x >= 0.0 && x <= 1.0)) throw PreconditionError("incomplete_beta: x must be in [0, 1]");
    if (x == 0.0 || x == 1.0) return x;
    const double log_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
    return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_sf(double t, double df) {
    if (!(df > 0.0)) throw PreconditionError("student_t_sf: df must be positive");
    if (std::isnan(t)) return t;
    const double tail = 0.5 * incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
    return t > 0.0 ? tail : 1.0 - tail;
}

double binomial_upper_tail(std::uint64_t k, std::uint64_t n, double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw PreconditionError("binomial_upper_tail: p must be in [0, 1]");
    if (k == 0) return 1.0;
    if (k > n) return 0.0;
    if (p == 0.0) return 0.0;
    if (p == 1.0) return 1.0;
    const double nn = static_cast<double>(n);
    const double lp = std::log(p), lq = std::log1p(-p);
    double sum = 0.0;
    for (std::uint64_t j = k; j <= n; ++j) {
        const double jj = static_cast<double>(j);
        const double log_term =
            std::lgamma(nn + 1.0) - std::lgamma(jj + 1.0) - std::lgamma(nn - jj + 1.0) + jj * lp + (nn - jj) * lq;
        sum += std::exp(log_term);
    }
    return sum > 1.0 ? 1.0 : sum;
}

}  // namespace memaudit::stats
