#pragma once

namespace memaudit::stats {

/// Standard normal CDF. Series expansion of erf for |x| < 3, continued
/// fraction for erfc beyond; absolute error below 1e-15 and small relative
/// error in both tails.
double normal_cdf(double x);

/// Standard normal upper tail 1 - Phi(x) without cancellation.
double normal_sf(double x);

double normal_pdf(double x);

/// Inverse of normal_cdf for p in (0, 1). Throws PreconditionError otherwise.
double normal_quantile(double p);

}  // namespace memaudit::stats
