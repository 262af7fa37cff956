#include "memaudit/stats/normal.hpp"

#include "memaudit/error.hpp"

#include <cmath>
#include <numbers>

namespace memaudit::stats {

namespace {

constexpr double kSwitch = 3.0;

// erf(z) = 2/sqrt(pi) * exp(-z^2) * sum_n (2z^2)^n z / (1*3*...*(2n+1)).
// Every term is positive, so there is no cancellation.
double erf_series(double z) {
    const double z2 = z * z;
    double term = z;
    double sum = z;
    for (int n = 1; n < 200; ++n) {
        term *= 2.0 * z2 / (2.0 * n + 1.0);
        sum += term;
        if (term < sum * 1e-17) break;
    }
    return 2.0 / std::sqrt(std::numbers::pi) * std::exp(-z2) * sum;
}

// erfc(z) for z > ~2 by the continued fraction
//   erfc(z) = exp(-z^2)/sqrt(pi) * 1/(z + (1/2)/(z + 1/(z + (3/2)/(z + ...))))
// evaluated with the modified Lentz method.
double erfc_cf(double z) {
    constexpr double tiny = 1e-300;
    double f = z;
    double c = z;
    double d = 0.0;
    for (int k = 1; k < 500; ++k) {
        const double a = 0.5 * k;
        d = z + a * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = z + a / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = c * d;
        f *= delta;
        if (std::fabs(delta - 1.0) < 1e-16) break;
    }
    return std::exp(-z * z) / std::sqrt(std::numbers::pi) / f;
}

// Lower tail Phi(-a) for a >= 0.
double lower_tail(double a) {
    const double z = a / std::numbers::sqrt2;
    if (a < kSwitch) return 0.5 - 0.5 * erf_series(z);
    return 0.5 * erfc_cf(z);
}

}  // namespace

double normal_cdf(double x) {
    if (std::isnan(x)) return x;
    if (x < 0.0) return lower_tail(-x);
    return 1.0 - lower_tail(x);
}

double normal_sf(double x) {
    if (std::isnan(x)) return x;
    if (x > 0.0) return lower_tail(x);
    return 1.0 - lower_tail(-x);
}

double normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw PreconditionError("normal_quantile: p must be in (0, 1)");
    if (p == 0.5) return 0.0;
    // Work in the lower tail so small probabilities keep full precision.
    const bool upper = p > 0.5;
    const double q = upper ? 1.0 - p : p;
    double lo = -40.0, hi = 0.0;
    for (int i = 0; i < 200 && hi - lo > 1e-12; ++i) {
        const double mid = 0.5 * (lo + hi);
        (lower_tail(-mid) < q ? lo : hi) = mid;
    }
    double x = 0.5 * (lo + hi);
    for (int i = 0; i < 3; ++i) {
        const double step = (lower_tail(-x) - q) / normal_pdf(x);
        if (!std::isfinite(step)) break;
        x -= step;
    }
    return upper ? -x : x;
}

}  // namespace memaudit::stats
