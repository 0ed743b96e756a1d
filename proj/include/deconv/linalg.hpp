#pragma once

#include <Eigen/Core>

#include <vector>

namespace deconv::linalg {

/// Relative symmetry tolerance for covariance inputs.
inline constexpr double kSymmetryTolerance = 1e-12;

/// Throws DomainError unless max |S - S'| <= kSymmetryTolerance * max(1, max |S|).
void require_symmetric(const Eigen::MatrixXd& sigma);

/**
 * Symmetric pseudo-inverse square root.
 *
 * Eigenvalues below lambda_max / condition_cap are dropped, so R * Sigma * R
 * is the identity on the retained eigenspace. Throws DomainError for
 * non-symmetric input and NumericalError when nothing is retained.
 */
[[nodiscard]] Eigen::MatrixXd inv_sqrt_psd(const Eigen::MatrixXd& sigma, double condition_cap,
                                           int* retained_rank = nullptr);

/**
 * Cholesky factor of a PSD matrix without pivoting, so the factor of every
 * leading block is the leading block of the factor.
 *
 * Pivots below lambda_max / condition_cap are dropped: their column is zeroed
 * and the direction contributes nothing to quadratic forms.
 */
struct NestedFactor {
    Eigen::MatrixXd lower;
    std::vector<bool> kept;
    int rank = 0;
};

[[nodiscard]] NestedFactor nested_cholesky(const Eigen::MatrixXd& sigma, double condition_cap);

/// b_k' Sigma_k^- b_k for k = 1..dim, accumulated from one forward solve.
[[nodiscard]] Eigen::VectorXd nested_quadratic_forms(const NestedFactor& factor, const Eigen::VectorXd& b);

}  // namespace deconv::linalg
