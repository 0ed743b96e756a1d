#pragma once

namespace deconv::stats {

/// P(chi2_df <= x); 0 for x <= 0.
[[nodiscard]] double chi2_cdf(double x, double df);

/// P(chi2_df > x), accurate in the far tail.
[[nodiscard]] double chi2_sf(double x, double df);

/// Inverse of chi2_cdf for p in [0, 1).
[[nodiscard]] double chi2_quantile(double p, double df);

}  // namespace deconv::stats
