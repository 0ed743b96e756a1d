#pragma once

#include <Eigen/Core>

#include <functional>
#include <vector>

namespace deconv::measures {

/// Nodes and weights of an interpolatory rule.
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Gauss-Legendre rule on [-1, 1] (weights sum to 2).
[[nodiscard]] GaussRule gauss_legendre(int points);

/// Gauss-Legendre rule on [0, 1] with weights summing to 1.
[[nodiscard]] GaussRule gauss_legendre_unit(int points);

/// Gauss rule for the Gamma(alpha, 1) probability density x^{alpha-1} e^{-x} / Gamma(alpha).
[[nodiscard]] GaussRule gauss_laguerre(int points, double alpha);

struct AdaptiveOptions {
    double tolerance = 1e-10;  ///< absolute, on the max-norm of the integral
    int initial_panels = 8;
    int max_depth = 40;
    int max_panels = 200000;
};

/// Vector-valued integrand.
using VectorIntegrand = std::function<Eigen::VectorXd(double)>;

/**
 * Adaptive composite Gauss-Legendre integration of a vector-valued function.
 *
 * Each panel is compared against its two halves; a panel is accepted when the
 * max-norm difference is below its share of the tolerance (proportional to
 * width). Throws QuadratureError with the achieved estimate when the depth or
 * panel budget is exhausted.
 */
[[nodiscard]] Eigen::VectorXd integrate_adaptive(const VectorIntegrand& f, double a, double b, Eigen::Index dim,
                                                 const AdaptiveOptions& options = {});

/// Scalar convenience wrapper.
[[nodiscard]] double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                        const AdaptiveOptions& options = {});

}  // namespace deconv::measures
