#include "deconv/chi2.hpp"

#include "deconv/error.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <limits>

namespace deconv::stats {

namespace {

void check_df(double df) {
    if (!(df > 0.0) || !std::isfinite(df)) {
        throw DomainError("chi-squared degrees of freedom must be positive");
    }
}

}  // namespace

double chi2_cdf(double x, double df) {
    check_df(df);
    if (std::isnan(x)) {
        throw DomainError("chi2_cdf of NaN");
    }
    if (x <= 0.0) {
        return 0.0;
    }
    if (std::isinf(x)) {
        return 1.0;
    }
    return boost::math::gamma_p(0.5 * df, 0.5 * x);
}

double chi2_sf(double x, double df) {
    check_df(df);
    if (std::isnan(x)) {
        throw DomainError("chi2_sf of NaN");
    }
    if (x <= 0.0) {
        return 1.0;
    }
    if (std::isinf(x)) {
        return 0.0;
    }
    return boost::math::gamma_q(0.5 * df, 0.5 * x);
}

double chi2_quantile(double p, double df) {
    check_df(df);
    if (!(p >= 0.0 && p < 1.0)) {
        throw DomainError("chi2_quantile needs p in [0, 1)");
    }
    if (p == 0.0) {
        return 0.0;
    }
    return 2.0 * boost::math::gamma_p_inv(0.5 * df, p);
}

}  // namespace deconv::stats
