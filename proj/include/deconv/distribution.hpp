#pragma once

#include "deconv/rng.hpp"

#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace deconv::measures {

class DistributionSpec;

struct Exponential {
    double mean;
};

struct Gamma {
    double shape;
    double scale;
};

/// Equivalent to Gamma(df / 2, 2); kept distinct because df = 1 is sampled as a squared normal.
struct ChiSquared {
    double df;
};

struct Poisson {
    double mean;
};

/// Geometric on {0, 1, ...} parameterized by its mean m: q = m / (1 + m), P(x) = (1 - q) q^x.
struct Geometric {
    double mean;
    [[nodiscard]] double q() const noexcept { return mean / (1.0 + mean); }
};

/// Uniform on [low, high]; Uniform01 is the default.
struct Uniform {
    double low = 0.0;
    double high = 1.0;
};

struct PointMass {
    double value;
};

/// weight * first + (1 - weight) * second.
struct Mixture {
    double weight;
    std::shared_ptr<const DistributionSpec> first;
    std::shared_ptr<const DistributionSpec> second;
};

/**
 * A univariate law. Build through the named factories, which validate
 * parameters and throw DomainError.
 */
class DistributionSpec {
public:
    using Kind = std::variant<Exponential, Gamma, ChiSquared, Poisson, Geometric, Uniform, PointMass, Mixture>;

    static DistributionSpec exponential(double mean);
    static DistributionSpec gamma(double shape, double scale);
    static DistributionSpec chi_squared(double df);
    static DistributionSpec poisson(double mean);
    static DistributionSpec geometric(double mean);
    static DistributionSpec uniform01();
    static DistributionSpec uniform(double low, double high);
    static DistributionSpec point_mass(double value);
    static DistributionSpec mixture(double weight, DistributionSpec first, DistributionSpec second);

    [[nodiscard]] const Kind& kind() const noexcept { return kind_; }

    /// All mass on the nonnegative integers.
    [[nodiscard]] bool is_integer_valued() const;
    [[nodiscard]] double mean() const;
    /// Smallest and largest point of the support (upper may be +inf).
    [[nodiscard]] double support_lower() const;
    [[nodiscard]] double support_upper() const;
    [[nodiscard]] std::string describe() const;

private:
    explicit DistributionSpec(Kind kind) : kind_(std::move(kind)) {}
    Kind kind_;
};

/// Density w.r.t. Lebesgue measure (continuous kinds) or counting measure (discrete kinds).
[[nodiscard]] double pdf_or_pmf(const DistributionSpec& dist, double x);

[[nodiscard]] double sample_one(const DistributionSpec& dist, RngStream& rng);
[[nodiscard]] std::vector<double> sample(const DistributionSpec& dist, RngStream& rng, std::size_t count);

// Reference measures --------------------------------------------------------

enum class ReferenceKind { Exponential1, Uniform01, Geometric };

/// The probability measure mu the basis is orthogonal against.
struct ReferenceMeasureSpec {
    ReferenceKind kind = ReferenceKind::Exponential1;
    double p = 0.5;  ///< only for Geometric: mu(x) = p^x (1 - p)

    static ReferenceMeasureSpec exponential1() { return {ReferenceKind::Exponential1, 0.5}; }
    static ReferenceMeasureSpec uniform01() { return {ReferenceKind::Uniform01, 0.5}; }
    static ReferenceMeasureSpec geometric(double p);

    friend bool operator==(const ReferenceMeasureSpec&, const ReferenceMeasureSpec&) = default;
};

[[nodiscard]] std::string to_string(const ReferenceMeasureSpec& ref);

[[nodiscard]] bool in_support(const ReferenceMeasureSpec& ref, double x);

/// The density m of the reference measure; zero outside its support.
[[nodiscard]] double density_m(const ReferenceMeasureSpec& ref, double x);

}  // namespace deconv::measures
