#include "deconv/distribution.hpp"

#include "deconv/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace deconv::measures {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// exp(-mean) must stay representable for the inversion sampler.
constexpr double kMaxPoissonMean = 500.0;

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool is_nonneg_integer(double x) { return x >= 0.0 && std::isfinite(x) && x == std::floor(x); }

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw DomainError(std::string(what) + " must be positive and finite");
    }
}

double gamma_pdf(double shape, double scale, double x) {
    if (x < 0.0) {
        return 0.0;
    }
    if (x == 0.0) {
        if (shape < 1.0) {
            return kInf;
        }
        return shape == 1.0 ? 1.0 / scale : 0.0;
    }
    return std::exp((shape - 1.0) * std::log(x) - x / scale - std::lgamma(shape) - shape * std::log(scale));
}

double sample_exponential(double mean, RngStream& rng) { return -mean * std::log1p(-rng.uniform()); }

// Marsaglia & Tsang (2000); shape < 1 boosted through U^{1/shape}.
double sample_gamma(double shape, double scale, RngStream& rng) {
    if (shape == 1.0) {
        return sample_exponential(scale, rng);
    }
    if (shape < 1.0) {
        const double g = sample_gamma(shape + 1.0, 1.0, rng);
        return scale * g * std::pow(rng.uniform_positive(), 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        const double x = rng.normal();
        double v = 1.0 + c * x;
        if (v <= 0.0) {
            continue;
        }
        v = v * v * v;
        const double u = rng.uniform_positive();
        if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) {
            return scale * d * v;
        }
    }
}

double sample_poisson(double mean, RngStream& rng) {
    const double u = rng.uniform();
    double p = std::exp(-mean);
    double cdf = p;
    double x = 0.0;
    while (u >= cdf) {
        x += 1.0;
        p *= mean / x;
        const double next = cdf + p;
        if (next == cdf) {
            break;  // remaining tail below double resolution
        }
        cdf = next;
    }
    return x;
}

double sample_geometric(double q, RngStream& rng) {
    return std::floor(std::log1p(-rng.uniform()) / std::log(q));
}

}  // namespace

DistributionSpec DistributionSpec::exponential(double mean) {
    require_positive(mean, "exponential mean");
    return DistributionSpec(Exponential{mean});
}

DistributionSpec DistributionSpec::gamma(double shape, double scale) {
    require_positive(shape, "gamma shape");
    require_positive(scale, "gamma scale");
    return DistributionSpec(Gamma{shape, scale});
}

DistributionSpec DistributionSpec::chi_squared(double df) {
    require_positive(df, "chi-squared degrees of freedom");
    return DistributionSpec(ChiSquared{df});
}

DistributionSpec DistributionSpec::poisson(double mean) {
    require_positive(mean, "Poisson mean");
    if (mean > kMaxPoissonMean) {
        throw DomainError("Poisson mean above supported maximum 500");
    }
    return DistributionSpec(Poisson{mean});
}

DistributionSpec DistributionSpec::geometric(double mean) {
    require_positive(mean, "geometric mean");
    return DistributionSpec(Geometric{mean});
}

DistributionSpec DistributionSpec::uniform01() { return DistributionSpec(Uniform{0.0, 1.0}); }

DistributionSpec DistributionSpec::uniform(double low, double high) {
    if (!std::isfinite(low) || !std::isfinite(high) || !(high > low)) {
        throw DomainError("uniform bounds must be finite with low < high");
    }
    return DistributionSpec(Uniform{low, high});
}

DistributionSpec DistributionSpec::point_mass(double value) {
    if (!std::isfinite(value)) {
        throw DomainError("point mass location must be finite");
    }
    return DistributionSpec(PointMass{value});
}

DistributionSpec DistributionSpec::mixture(double weight, DistributionSpec first, DistributionSpec second) {
    if (!(weight >= 0.0 && weight <= 1.0)) {
        throw DomainError("mixture weight must lie in [0, 1]");
    }
    return DistributionSpec(Mixture{weight, std::make_shared<const DistributionSpec>(std::move(first)),
                                    std::make_shared<const DistributionSpec>(std::move(second))});
}

bool DistributionSpec::is_integer_valued() const {
    return std::visit(Overloaded{
                          [](const Poisson&) { return true; },
                          [](const Geometric&) { return true; },
                          [](const PointMass& d) { return is_nonneg_integer(d.value); },
                          [](const Mixture& d) {
                              return (d.weight == 0.0 || d.first->is_integer_valued()) &&
                                     (d.weight == 1.0 || d.second->is_integer_valued());
                          },
                          [](const auto&) { return false; },
                      },
                      kind_);
}

double DistributionSpec::mean() const {
    return std::visit(Overloaded{
                          [](const Exponential& d) { return d.mean; },
                          [](const Gamma& d) { return d.shape * d.scale; },
                          [](const ChiSquared& d) { return d.df; },
                          [](const Poisson& d) { return d.mean; },
                          [](const Geometric& d) { return d.mean; },
                          [](const Uniform& d) { return 0.5 * (d.low + d.high); },
                          [](const PointMass& d) { return d.value; },
                          [](const Mixture& d) {
                              return d.weight * d.first->mean() + (1.0 - d.weight) * d.second->mean();
                          },
                      },
                      kind_);
}

double DistributionSpec::support_lower() const {
    return std::visit(Overloaded{
                          [](const Uniform& d) { return d.low; },
                          [](const PointMass& d) { return d.value; },
                          [](const Mixture& d) {
                              if (d.weight == 1.0) return d.first->support_lower();
                              if (d.weight == 0.0) return d.second->support_lower();
                              return std::min(d.first->support_lower(), d.second->support_lower());
                          },
                          [](const auto&) { return 0.0; },
                      },
                      kind_);
}

double DistributionSpec::support_upper() const {
    return std::visit(Overloaded{
                          [](const Uniform& d) { return d.high; },
                          [](const PointMass& d) { return d.value; },
                          [](const Mixture& d) {
                              if (d.weight == 1.0) return d.first->support_upper();
                              if (d.weight == 0.0) return d.second->support_upper();
                              return std::max(d.first->support_upper(), d.second->support_upper());
                          },
                          [](const auto&) { return kInf; },
                      },
                      kind_);
}

std::string DistributionSpec::describe() const {
    std::ostringstream os;
    os.precision(17);
    std::visit(Overloaded{
                   [&](const Exponential& d) { os << "Exponential(mean=" << d.mean << ")"; },
                   [&](const Gamma& d) { os << "Gamma(shape=" << d.shape << ", scale=" << d.scale << ")"; },
                   [&](const ChiSquared& d) { os << "ChiSquared(df=" << d.df << ")"; },
                   [&](const Poisson& d) { os << "Poisson(mean=" << d.mean << ")"; },
                   [&](const Geometric& d) { os << "Geometric(mean=" << d.mean << ")"; },
                   [&](const Uniform& d) { os << "Uniform(" << d.low << ", " << d.high << ")"; },
                   [&](const PointMass& d) { os << "PointMass(" << d.value << ")"; },
                   [&](const Mixture& d) {
                       os << "Mixture(" << d.weight << ": " << d.first->describe() << ", " << d.second->describe()
                          << ")";
                   },
               },
               kind_);
    return os.str();
}

double pdf_or_pmf(const DistributionSpec& dist, double x) {
    return std::visit(Overloaded{
                          [x](const Exponential& d) { return x < 0.0 ? 0.0 : std::exp(-x / d.mean) / d.mean; },
                          [x](const Gamma& d) { return gamma_pdf(d.shape, d.scale, x); },
                          [x](const ChiSquared& d) { return gamma_pdf(0.5 * d.df, 2.0, x); },
                          [x](const Poisson& d) {
                              if (!is_nonneg_integer(x)) return 0.0;
                              return std::exp(x * std::log(d.mean) - d.mean - std::lgamma(x + 1.0));
                          },
                          [x](const Geometric& d) {
                              if (!is_nonneg_integer(x)) return 0.0;
                              const double q = d.q();
                              return (1.0 - q) * std::pow(q, x);
                          },
                          [x](const Uniform& d) {
                              return (x >= d.low && x <= d.high) ? 1.0 / (d.high - d.low) : 0.0;
                          },
                          [x](const PointMass& d) { return x == d.value ? 1.0 : 0.0; },
                          [x](const Mixture& d) {
                              return d.weight * pdf_or_pmf(*d.first, x) +
                                     (1.0 - d.weight) * pdf_or_pmf(*d.second, x);
                          },
                      },
                      dist.kind());
}

double sample_one(const DistributionSpec& dist, RngStream& rng) {
    return std::visit(Overloaded{
                          [&](const Exponential& d) { return sample_exponential(d.mean, rng); },
                          [&](const Gamma& d) { return sample_gamma(d.shape, d.scale, rng); },
                          [&](const ChiSquared& d) {
                              if (d.df == 1.0) {
                                  const double z = rng.normal();
                                  return z * z;
                              }
                              return sample_gamma(0.5 * d.df, 2.0, rng);
                          },
                          [&](const Poisson& d) { return sample_poisson(d.mean, rng); },
                          [&](const Geometric& d) { return sample_geometric(d.q(), rng); },
                          [&](const Uniform& d) { return d.low + (d.high - d.low) * rng.uniform(); },
                          [&](const PointMass& d) { return d.value; },
                          [&](const Mixture& d) {
                              return rng.uniform() < d.weight ? sample_one(*d.first, rng) : sample_one(*d.second, rng);
                          },
                      },
                      dist.kind());
}

std::vector<double> sample(const DistributionSpec& dist, RngStream& rng, std::size_t count) {
    std::vector<double> out(count);
    for (auto& v : out) {
        v = sample_one(dist, rng);
    }
    return out;
}

ReferenceMeasureSpec ReferenceMeasureSpec::geometric(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw DomainError("geometric reference parameter p must lie in (0, 1)");
    }
    return {ReferenceKind::Geometric, p};
}

std::string to_string(const ReferenceMeasureSpec& ref) {
    switch (ref.kind) {
        case ReferenceKind::Exponential1:
            return "Exponential1";
        case ReferenceKind::Uniform01:
            return "Uniform01";
        case ReferenceKind::Geometric: {
            std::ostringstream os;
            os.precision(17);
            os << "Geometric(p=" << ref.p << ")";
            return os.str();
        }
    }
    return "unknown";
}

bool in_support(const ReferenceMeasureSpec& ref, double x) {
    switch (ref.kind) {
        case ReferenceKind::Exponential1:
            return x >= 0.0 && std::isfinite(x);
        case ReferenceKind::Uniform01:
            return x >= 0.0 && x <= 1.0;
        case ReferenceKind::Geometric:
            return is_nonneg_integer(x);
    }
    return false;
}

double density_m(const ReferenceMeasureSpec& ref, double x) {
    if (!in_support(ref, x)) {
        return 0.0;
    }
    switch (ref.kind) {
        case ReferenceKind::Exponential1:
            return std::exp(-x);
        case ReferenceKind::Uniform01:
            return 1.0;
        case ReferenceKind::Geometric:
            return std::pow(ref.p, x) * (1.0 - ref.p);
    }
    return 0.0;
}

}  // namespace deconv::measures
