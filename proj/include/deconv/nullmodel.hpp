#pragma once

#include "deconv/distribution.hpp"
#include "deconv/expectation.hpp"
#include "deconv/orthopoly.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace deconv::nullmodel {

/// Y and Z independent.
struct Independent {};

/// Y and Z drawn jointly; the hypothesis then concerns the law of Y given Z.
struct JointLaw {
    std::string name;  ///< stable identifier, part of the null's content hash
    measures::JointSampler sampler;
};

using Dependence = std::variant<Independent, JointLaw>;

/**
 * Y = Y0 + coupling * Z with Y0 ~ y_law independent of Z ~ z_law.
 * Under this law Y | Z is y_law shifted by coupling * Z.
 */
[[nodiscard]] JointLaw noise_coupled(const measures::DistributionSpec& y_law, const measures::DistributionSpec& z_law,
                                     double coupling);

/// Basis degree used when nothing else is requested; covers the largest automatic k(n).
inline constexpr int kDefaultMaxDegree = 15;

/**
 * The null hypothesis: Y ~ y_law, known noise Z ~ z_law, X = Y + Z, tested in
 * the orthonormal basis of the reference measure.
 */
struct NullSpec {
    measures::DistributionSpec y_law;
    measures::DistributionSpec z_law;
    Dependence dependence;
    measures::ReferenceMeasureSpec ref;
    std::shared_ptr<const orthopoly::BasisTable> basis;

    [[nodiscard]] bool independent() const noexcept { return std::holds_alternative<Independent>(dependence); }
};

/// Builds and certifies the basis matching the reference measure
/// (Laguerre alpha = 1, shifted Legendre, Meixner p) and validates the pairing.
[[nodiscard]] NullSpec make_null(measures::DistributionSpec y_law, measures::DistributionSpec z_law,
                                 measures::ReferenceMeasureSpec ref, int max_degree = kDefaultMaxDegree,
                                 Dependence dependence = Independent{});

/// Throws DomainError if the basis does not match ref or the support of Y + Z leaves the support of ref.
void validate(const NullSpec& null);

/// Draws X = Y + Z under the null.
[[nodiscard]] double sample_x(const NullSpec& null, measures::RngStream& rng);
[[nodiscard]] std::vector<double> sample_x(const NullSpec& null, measures::RngStream& rng, std::size_t count);

enum class Method { ClosedForm, Quadrature, MonteCarlo };

[[nodiscard]] std::string to_string(Method method);

/// ClosedForm for independent nulls, MonteCarlo for dependent ones.
[[nodiscard]] Method default_method(const NullSpec& null);

struct CoefficientOptions {
    std::optional<Method> method;  ///< empty: default_method
    double u_split = 0.5;          ///< u of the addition split, v = 1 - u
    double tolerance = measures::kDefaultTolerance;
    std::size_t mc_draws = 1'000'000;
    std::uint64_t mc_seed = 20090301;
};

/// First and second moments of Q_j(X) m(X) under the null.
struct NullMoments {
    int k = 0;
    Eigen::VectorXd alphas;          ///< E Q_j(X) m(X)
    Eigen::MatrixXd second;          ///< E Q_i(X) Q_j(X) m(X)^2
    Eigen::VectorXd alpha_stderr;    ///< Monte Carlo only, else zeros
    Eigen::MatrixXd second_stderr;   ///< Monte Carlo only, else zeros
    Method method = Method::ClosedForm;
};

/**
 * alpha_1..alpha_k and Sigma_k = Var(Q(X) m(X)) under H0.
 *
 * Entries do not depend on k: the order-(k-1) object is an exact sub-object
 * of the order-k one.
 */
struct NullCoefficients {
    int k = 0;
    Eigen::VectorXd alphas;
    Eigen::MatrixXd sigma;
    Method method = Method::ClosedForm;
    double min_eigen = 0.0;
    /// Magnitude of the most negative eigenvalue treated as zero (0 when none).
    double psd_clip = 0.0;
    std::string provenance;

    /// Leading order-k sub-object.
    [[nodiscard]] NullCoefficients leading(int k) const;
};

/// Negative eigenvalues down to this are accepted as rounding noise.
inline constexpr double kPsdSlack = 1e-10;

[[nodiscard]] NullMoments compute_moments(const NullSpec& null, int k, const CoefficientOptions& options = {});

[[nodiscard]] NullCoefficients compute_coefficients(const NullSpec& null, int k,
                                                    const CoefficientOptions& options = {});

[[nodiscard]] Eigen::VectorXd compute_alphas(const NullSpec& null, int k, const CoefficientOptions& options = {});

[[nodiscard]] Eigen::MatrixXd compute_sigma(const NullSpec& null, int k, const CoefficientOptions& options = {});

/// Builds NullCoefficients from moments; checks symmetry and the PSD slack.
[[nodiscard]] NullCoefficients coefficients_from_moments(const NullMoments& moments, std::string provenance);

inline constexpr double kDefaultConditionCap = 1e12;

struct EigenDiagnostics {
    std::vector<double> lambda_min;  ///< per nested order 1..k
    std::vector<double> lambda_max;
    std::vector<double> condition;   ///< +inf when lambda_min <= 0
    int usable_k = 0;                ///< largest k whose leading blocks all have condition < cap
};

[[nodiscard]] EigenDiagnostics eigen_floor_diagnostics(const Eigen::MatrixXd& sigma,
                                                       double condition_cap = kDefaultConditionCap);

[[nodiscard]] EigenDiagnostics eigen_floor_diagnostics(const NullCoefficients& coeffs,
                                                       double condition_cap = kDefaultConditionCap);

}  // namespace deconv::nullmodel
