#include "deconv/expectation.hpp"

#include "deconv/error.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>

namespace deconv::measures {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

AdaptiveOptions with_tolerance(double tol) {
    AdaptiveOptions o;
    o.tolerance = tol;
    return o;
}

Eigen::VectorXd gamma_expectation(double shape, double scale, const VectorIntegrand& f, Eigen::Index dim,
                                  double tol) {
    const double upper = scale * boost::math::gamma_q_inv(shape, kTailMass);
    const double log_norm = std::lgamma(shape) + shape * std::log(scale);
    if (shape < 1.0) {
        // y = t^2: density(t^2) * 2t = 2 t^{2 shape - 1} e^{-t^2/scale} / (Gamma(shape) scale^shape)
        // Panel nodes are interior, so t > 0 here.
        const VectorIntegrand g = [&](double t) -> Eigen::VectorXd {
            const double dens =
                2.0 * std::exp((2.0 * shape - 1.0) * std::log(t) - t * t / scale - log_norm);
            return dens * f(t * t);
        };
        return integrate_adaptive(g, 0.0, std::sqrt(upper), dim, with_tolerance(tol));
    }
    const VectorIntegrand g = [&](double y) -> Eigen::VectorXd {
        const double dens = std::exp((shape - 1.0) * std::log(y) - y / scale - log_norm);
        return dens * f(y);
    };
    return integrate_adaptive(g, 0.0, upper, dim, with_tolerance(tol));
}

}  // namespace

JointSampler independent_sampler(const DistributionSpec& y, const DistributionSpec& z) {
    return [y, z](RngStream& rng) {
        const double a = sample_one(y, rng);
        const double b = sample_one(z, rng);
        return std::pair{a, b};
    };
}

std::pair<double, double> effective_support(const DistributionSpec& dist) {
    return std::visit(
        Overloaded{
            [](const Exponential& d) { return std::pair{0.0, -d.mean * std::log(kTailMass)}; },
            [](const Gamma& d) { return std::pair{0.0, d.scale * boost::math::gamma_q_inv(d.shape, kTailMass)}; },
            [](const ChiSquared& d) {
                return std::pair{0.0, 2.0 * boost::math::gamma_q_inv(0.5 * d.df, kTailMass)};
            },
            [](const Uniform& d) { return std::pair{d.low, d.high}; },
            [&dist](const auto&) { return std::pair{dist.support_lower(), dist.support_upper()}; },
        },
        dist.kind());
}

Eigen::VectorXd expect_1d(const DistributionSpec& dist, const VectorIntegrand& f, Eigen::Index dim, double tol) {
    return std::visit(
        Overloaded{
            [&](const PointMass& d) -> Eigen::VectorXd { return f(d.value); },
            [&](const Mixture& d) -> Eigen::VectorXd {
                Eigen::VectorXd out = Eigen::VectorXd::Zero(dim);
                if (d.weight > 0.0) {
                    out += d.weight * expect_1d(*d.first, f, dim, tol);
                }
                if (d.weight < 1.0) {
                    out += (1.0 - d.weight) * expect_1d(*d.second, f, dim, tol);
                }
                return out;
            },
            [&](const Poisson& d) -> Eigen::VectorXd {
                Eigen::VectorXd out = Eigen::VectorXd::Zero(dim);
                const double log_mean = std::log(d.mean);
                for (double x = 0.0;; x += 1.0) {
                    const double pmf = std::exp(x * log_mean - d.mean - std::lgamma(x + 1.0));
                    out += pmf * f(x);
                    // Geometric bound on the remaining tail once past the mode.
                    if (x + 1.0 > d.mean && pmf * d.mean / (x + 1.0 - d.mean) < kDiscreteTailMass) {
                        break;
                    }
                }
                return out;
            },
            [&](const Geometric& d) -> Eigen::VectorXd {
                Eigen::VectorXd out = Eigen::VectorXd::Zero(dim);
                const double q = d.q();
                double weight = 1.0 - q;
                double tail = q;  // P(X > x)
                for (double x = 0.0;; x += 1.0) {
                    out += weight * f(x);
                    if (tail < kDiscreteTailMass) {
                        break;
                    }
                    weight *= q;
                    tail *= q;
                }
                return out;
            },
            [&](const Uniform& d) -> Eigen::VectorXd {
                const double inv = 1.0 / (d.high - d.low);
                const VectorIntegrand g = [&](double y) -> Eigen::VectorXd { return inv * f(y); };
                return integrate_adaptive(g, d.low, d.high, dim, with_tolerance(tol));
            },
            [&](const Exponential& d) -> Eigen::VectorXd { return gamma_expectation(1.0, d.mean, f, dim, tol); },
            [&](const Gamma& d) -> Eigen::VectorXd { return gamma_expectation(d.shape, d.scale, f, dim, tol); },
            [&](const ChiSquared& d) -> Eigen::VectorXd { return gamma_expectation(0.5 * d.df, 2.0, f, dim, tol); },
        },
        dist.kind());
}

double expect_1d(const DistributionSpec& dist, const std::function<double(double)>& f, double tol) {
    const VectorIntegrand g = [&f](double y) {
        Eigen::VectorXd v(1);
        v(0) = f(y);
        return v;
    };
    return expect_1d(dist, g, 1, tol)(0);
}

Eigen::VectorXd expect_conv(const DistributionSpec& y, const DistributionSpec& z, const PairIntegrand& f,
                            Eigen::Index dim, double tol) {
    const double inner_tol = 0.1 * tol;
    const VectorIntegrand outer = [&](double yv) {
        const VectorIntegrand inner = [&](double zv) { return f(yv, zv); };
        return expect_1d(z, inner, dim, inner_tol);
    };
    return expect_1d(y, outer, dim, 0.5 * tol);
}

double expect_conv(const DistributionSpec& y, const DistributionSpec& z,
                   const std::function<double(double, double)>& f, double tol) {
    const PairIntegrand g = [&f](double a, double b) {
        Eigen::VectorXd v(1);
        v(0) = f(a, b);
        return v;
    };
    return expect_conv(y, z, g, 1, tol)(0);
}

McEstimate mc_expect(const JointSampler& sampler, const std::function<double(double, double)>& f, std::size_t n,
                     RngStream& rng) {
    const PairIntegrand g = [&f](double a, double b) {
        Eigen::VectorXd v(1);
        v(0) = f(a, b);
        return v;
    };
    const McVectorEstimate est = mc_expect(sampler, g, 1, n, rng);
    return {est.mean(0), est.std_error(0)};
}

McVectorEstimate mc_expect(const JointSampler& sampler, const PairIntegrand& f, Eigen::Index dim, std::size_t n,
                           RngStream& rng) {
    if (n < 2) {
        throw DomainError("Monte Carlo expectation needs at least two draws");
    }
    // Welford accumulation per component.
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
    Eigen::VectorXd m2 = Eigen::VectorXd::Zero(dim);
    for (std::size_t i = 0; i < n; ++i) {
        const auto [a, b] = sampler(rng);
        const Eigen::VectorXd v = f(a, b);
        const Eigen::VectorXd delta = v - mean;
        mean += delta / static_cast<double>(i + 1);
        m2 += delta.cwiseProduct(v - mean);
    }
    McVectorEstimate out;
    out.mean = mean;
    out.std_error = (m2 / static_cast<double>(n - 1) / static_cast<double>(n)).cwiseSqrt();
    return out;
}

}  // namespace deconv::measures
