#pragma once

#include "deconv/distribution.hpp"
#include "deconv/quadrature.hpp"
#include "deconv/rng.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <functional>
#include <utility>

namespace deconv::measures {

/// Upper-tail mass dropped on each continuous axis.
inline constexpr double kTailMass = 1e-12;

/// Upper-tail mass dropped from discrete sums.
inline constexpr double kDiscreteTailMass = 1e-15;

inline constexpr double kDefaultTolerance = 1e-10;

/// Draws one (y, z) pair.
using JointSampler = std::function<std::pair<double, double>(RngStream&)>;

[[nodiscard]] JointSampler independent_sampler(const DistributionSpec& y, const DistributionSpec& z);

/// Integration range [lo, hi] carrying all but kTailMass of a continuous law.
[[nodiscard]] std::pair<double, double> effective_support(const DistributionSpec& dist);

/**
 * E f(Y) for a vector-valued f.
 *
 * Continuous laws use adaptive Gauss-Legendre panels over the truncated
 * support; Gamma laws with shape < 1 are integrated in t with y = t^2 so the
 * density singularity at 0 disappears. Discrete laws are summed until the
 * remaining mass is below kDiscreteTailMass. Mixtures and point masses are
 * handled exactly.
 */
[[nodiscard]] Eigen::VectorXd expect_1d(const DistributionSpec& dist, const VectorIntegrand& f, Eigen::Index dim,
                                        double tol = kDefaultTolerance);

[[nodiscard]] double expect_1d(const DistributionSpec& dist, const std::function<double(double)>& f,
                               double tol = kDefaultTolerance);

using PairIntegrand = std::function<Eigen::VectorXd(double, double)>;

/// E f(Y, Z) for independent Y and Z, by nesting expect_1d.
[[nodiscard]] Eigen::VectorXd expect_conv(const DistributionSpec& y, const DistributionSpec& z, const PairIntegrand& f,
                                          Eigen::Index dim, double tol = kDefaultTolerance);

[[nodiscard]] double expect_conv(const DistributionSpec& y, const DistributionSpec& z,
                                 const std::function<double(double, double)>& f, double tol = kDefaultTolerance);

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
};

struct McVectorEstimate {
    Eigen::VectorXd mean;
    Eigen::VectorXd std_error;
};

/// Sample mean and standard error of f over n joint draws. Throws DomainError for n < 2.
[[nodiscard]] McEstimate mc_expect(const JointSampler& sampler, const std::function<double(double, double)>& f,
                                   std::size_t n, RngStream& rng);

[[nodiscard]] McVectorEstimate mc_expect(const JointSampler& sampler, const PairIntegrand& f, Eigen::Index dim,
                                         std::size_t n, RngStream& rng);

}  // namespace deconv::measures
