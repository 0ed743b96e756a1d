#pragma once

#include <span>
#include <string>
#include <vector>

namespace deconv::orthopoly {

/// Highest degree any family will evaluate.
inline constexpr int kDegreeCap = 30;

/// Off-diagonal Gram tolerance for a certified basis.
inline constexpr double kGramTolerance = 1e-8;

enum class Family { GeneralizedLaguerre, ShiftedLegendre, Meixner };

[[nodiscard]] std::string to_string(Family family);

/**
 * Which orthogonal family, its shape parameter and the degree cap.
 *
 * `shape` is the Laguerre alpha (weight Gamma(alpha, 1)) or the Meixner p
 * (weight p^x (1 - p) on the nonnegative integers). Legendre ignores it.
 */
struct PolynomialFamilySpec {
    Family kind = Family::GeneralizedLaguerre;
    double shape = 1.0;
    int max_degree = 10;

    static PolynomialFamilySpec laguerre(double alpha, int max_degree);
    static PolynomialFamilySpec shifted_legendre(int max_degree);
    static PolynomialFamilySpec meixner(double p, int max_degree);

    /// Throws DomainError / DegreeOverflowError on invalid parameters.
    void validate() const;

    friend bool operator==(const PolynomialFamilySpec&, const PolynomialFamilySpec&) = default;
};

// Raw (unnormalized) evaluations ------------------------------------------

/// Generalized Laguerre L_{n,alpha} from the forward recurrence
/// (n+1) L_{n+1} = (2n + alpha - x) L_n - (n + alpha - 1) L_{n-1}, L_0 = 1, L_1 = alpha - x.
[[nodiscard]] double eval_laguerre(int degree, double alpha, double x);

/// alpha^{-n} n! L_{n,alpha}(x). This is the scale in which the binomial
/// addition theorem with weights u^s v^{n-s} holds.
[[nodiscard]] double eval_laguerre_scaled(int degree, double alpha, double x);

/// Shifted Legendre polynomial P_n(2x - 1), orthogonal on [0, 1].
[[nodiscard]] double eval_shifted_legendre(int degree, double x);

/// Meixner polynomial with b = 1, c = p, in the scale whose squared norm is
/// p^{-n} (1-p)^{2n} (n!)^2. Generated by
/// p/(1-p) M_{n+1} = ((p-1)x + (1+p)n + p) M_n - (1-p) n^2 M_{n-1}, M_0 = 1.
[[nodiscard]] double eval_meixner(int degree, double p, double x);

/// (1-c)^n (beta)_n M_n(x; beta, c) for general beta > 0. Equals eval_meixner at beta = 1.
[[nodiscard]] double eval_meixner_general(int degree, double beta, double c, double x);

/// Meixner recurrence started from the closed form M_1(x) = 1 - p - x/p
/// instead of the recurrence's own first step. Not orthogonal; kept so the
/// certificate can show it and fall back.
[[nodiscard]] double eval_meixner_printed_seed(int degree, double p, double x);

// Certified bases ----------------------------------------------------------

enum class MeixnerDefinition {
    PrintedSeed,     ///< M_1 = 1 - p - x/p, then the three-term recurrence
    RecurrenceSeed,  ///< M_1 from the recurrence at n = 0
};

/**
 * A polynomial family together with numerically computed norms.
 *
 * Immutable after construction; share freely between threads.
 */
class BasisTable {
public:
    [[nodiscard]] const PolynomialFamilySpec& family() const noexcept { return family_; }
    [[nodiscard]] int max_degree() const noexcept { return family_.max_degree; }
    [[nodiscard]] std::span<const double> norms() const noexcept { return norms_; }
    [[nodiscard]] const std::string& provenance() const noexcept { return provenance_; }
    [[nodiscard]] double max_gram_error() const noexcept { return max_gram_error_; }
    [[nodiscard]] MeixnerDefinition meixner_definition() const noexcept { return meixner_definition_; }

    /// Unnormalized value of the family member of the given degree.
    [[nodiscard]] double raw(int degree, double x) const;

    /// Orthonormal value Q_degree(x) = raw / norm.
    [[nodiscard]] double value(int degree, double x) const;

    /// Orthonormal values of degrees 0..out.size()-1 at x, computed with the
    /// recurrence rescaled to the orthonormal scale.
    void values(double x, std::span<double> out) const;

    /// True when x lies in the support of the orthogonality weight.
    [[nodiscard]] bool in_support(double x) const noexcept;

private:
    friend BasisTable certify_orthonormality(const PolynomialFamilySpec& family);

    struct Step {
        double a;  // coefficient of x q_n
        double b;  // coefficient of q_n
        double c;  // coefficient of q_{n-1}
    };

    PolynomialFamilySpec family_;
    MeixnerDefinition meixner_definition_ = MeixnerDefinition::RecurrenceSeed;
    std::vector<double> norms_;
    std::vector<Step> steps_;  // orthonormal-scale recurrence, index n produces degree n+1
    std::string provenance_;
    double max_gram_error_ = 0.0;
};

/// Computes norms by Gauss quadrature (continuous) or truncated summation
/// (Meixner) and checks the normalized Gram matrix. Throws
/// BasisInconsistencyError naming the worst pair if no definition passes.
[[nodiscard]] BasisTable certify_orthonormality(const PolynomialFamilySpec& family);

// Addition theorems -------------------------------------------------------

struct SplitTerm {
    int s;
    double coefficient;
};

/// Terms (s, C(n,s) (u/a)^s (v/a)^{n-s}), a = u + v, with
/// L~_{n,a}(y+z) = sum_s coefficient * L~_{s,u}(y) * L~_{n-s,v}(z)
/// for the scaled family eval_laguerre_scaled. With a = 1 the weights are u^s v^{n-s}.
[[nodiscard]] std::vector<SplitTerm> addition_split_laguerre(int n, double u, double v);

/// Terms (s, C(n,s)) with
/// M_{n;1,p}(y+z) = sum_s C(n,s) M_{s;u,p}(y) M_{n-s;v,p}(z), u + v = 1,
/// using eval_meixner_general for the components.
[[nodiscard]] std::vector<SplitTerm> addition_split_meixner(int n, double u, double v, double p);

/// Binomial coefficient as a double, exact for n <= kDegreeCap.
[[nodiscard]] double binomial(int n, int k);

}  // namespace deconv::orthopoly
