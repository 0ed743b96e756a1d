#include "deconv/nullmodel.hpp"

#include "deconv/error.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <sstream>

namespace deconv::nullmodel {

using measures::DistributionSpec;
using measures::ReferenceKind;
using measures::ReferenceMeasureSpec;
using orthopoly::Family;

namespace {

/// Index of (i, j), 0 <= i <= j < k, in the packed upper triangle.
Eigen::Index packed(int i, int j, int k) { return static_cast<Eigen::Index>(i) * k - i * (i - 1) / 2 + (j - i); }

Eigen::Index packed_size(int k) { return static_cast<Eigen::Index>(k) * (k + 1) / 2; }

void check_order(const NullSpec& null, int k) {
    if (k < 1) {
        throw DomainError("number of components k must be at least 1");
    }
    if (k > null.basis->max_degree()) {
        std::ostringstream os;
        os << "k = " << k << " exceeds the basis degree " << null.basis->max_degree();
        throw DegreeOverflowError(os.str());
    }
}

NullMoments unpack(const Eigen::VectorXd& first, const Eigen::VectorXd& second_packed, int stride, int k) {
    NullMoments m;
    m.k = k;
    m.alphas = first.head(k);
    m.second.resize(k, k);
    for (int i = 0; i < k; ++i) {
        for (int j = i; j < k; ++j) {
            const double v = second_packed(packed(i, j, stride));
            m.second(i, j) = v;
            m.second(j, i) = v;
        }
    }
    m.alpha_stderr = Eigen::VectorXd::Zero(k);
    m.second_stderr = Eigen::MatrixXd::Zero(k, k);
    return m;
}

/// Vector [Q_1 m, ..., Q_d m, packed Q_i Q_j m^2] at x.
Eigen::VectorXd moment_integrand(const NullSpec& null, int d, double x, std::vector<double>& vals) {
    Eigen::VectorXd out(d + packed_size(d));
    const double m = measures::density_m(null.ref, x);
    null.basis->values(x, std::span<double>(vals.data(), static_cast<std::size_t>(d) + 1));
    for (int i = 0; i < d; ++i) {
        out(i) = vals[static_cast<std::size_t>(i) + 1] * m;
    }
    const double m2 = m * m;
    for (int i = 0; i < d; ++i) {
        for (int j = i; j < d; ++j) {
            out(d + packed(i, j, d)) =
                vals[static_cast<std::size_t>(i) + 1] * vals[static_cast<std::size_t>(j) + 1] * m2;
        }
    }
    return out;
}

// Generic route: the whole degree range of the basis is integrated so that the
// adaptive mesh, and therefore every entry, is independent of k.
NullMoments quadrature_moments(const NullSpec& null, int k, const CoefficientOptions& options) {
    const int d = null.basis->max_degree();
    const auto dim = d + packed_size(d);
    const measures::PairIntegrand f = [&null, d](double y, double z) {
        thread_local std::vector<double> vals;
        vals.resize(static_cast<std::size_t>(d) + 1);
        return moment_integrand(null, d, y + z, vals);
    };
    const Eigen::VectorXd all = measures::expect_conv(null.y_law, null.z_law, f, dim, options.tolerance);
    NullMoments m = unpack(all.head(d), all.tail(packed_size(d)), d, k);
    m.method = Method::Quadrature;
    return m;
}

NullMoments monte_carlo_moments(const NullSpec& null, int k, const CoefficientOptions& options) {
    const measures::JointSampler sampler = std::holds_alternative<JointLaw>(null.dependence)
                                               ? std::get<JointLaw>(null.dependence).sampler
                                               : measures::independent_sampler(null.y_law, null.z_law);
    const measures::PairIntegrand f = [&null, k](double y, double z) {
        thread_local std::vector<double> vals;
        vals.resize(static_cast<std::size_t>(k) + 1);
        return moment_integrand(null, k, y + z, vals);
    };
    measures::RngStream rng(options.mc_seed, 0, measures::StreamDomain::Coefficients);
    const auto est = measures::mc_expect(sampler, f, k + packed_size(k), options.mc_draws, rng);
    NullMoments m = unpack(est.mean.head(k), est.mean.tail(packed_size(k)), k, k);
    m.alpha_stderr = est.std_error.head(k);
    for (int i = 0; i < k; ++i) {
        for (int j = i; j < k; ++j) {
            m.second_stderr(i, j) = m.second_stderr(j, i) = est.std_error(k + packed(i, j, k));
        }
    }
    m.method = Method::MonteCarlo;
    return m;
}

/// 1-D pieces of the split: first moments phi_s and second moments phi_s phi_t, s, t = 0..d.
struct SplitMoments {
    std::vector<double> first;
    Eigen::MatrixXd second;
};

SplitMoments split_moments(const DistributionSpec& law, int d, double tol,
                           const std::function<void(double, std::vector<double>&, double&, double&)>& component) {
    // component(x, phi, w1, w2) fills phi_0..phi_d and the first/second moment weights at x.
    const Eigen::Index size = d + 1;
    const measures::VectorIntegrand f = [&](double x) {
        thread_local std::vector<double> phi;
        phi.resize(static_cast<std::size_t>(size));
        double w1 = 0.0;
        double w2 = 0.0;
        component(x, phi, w1, w2);
        Eigen::VectorXd out(size + packed_size(static_cast<int>(size)));
        for (Eigen::Index s = 0; s < size; ++s) {
            out(s) = phi[static_cast<std::size_t>(s)] * w1;
        }
        for (int s = 0; s < size; ++s) {
            for (int t = s; t < size; ++t) {
                out(size + packed(s, t, static_cast<int>(size))) =
                    phi[static_cast<std::size_t>(s)] * phi[static_cast<std::size_t>(t)] * w2;
            }
        }
        return out;
    };
    const Eigen::VectorXd all = measures::expect_1d(law, f, size + packed_size(static_cast<int>(size)), tol);
    SplitMoments out;
    out.first.assign(all.data(), all.data() + size);
    out.second.resize(size, size);
    for (int s = 0; s < size; ++s) {
        for (int t = s; t < size; ++t) {
            out.second(s, t) = out.second(t, s) = all(size + packed(s, t, static_cast<int>(size)));
        }
    }
    return out;
}

double factorial(int n) {
    double r = 1.0;
    for (int i = 2; i <= n; ++i) {
        r *= i;
    }
    return r;
}

// Q_i(y + z) m(y + z) expanded by an addition theorem into products of
// one-dimensional functions of y and z; `scale[i]` converts the split family
// of degree i into the orthonormal Q_i.
NullMoments split_closed_form(int k, const SplitMoments& ym, const SplitMoments& zm,
                              const std::vector<std::vector<orthopoly::SplitTerm>>& splits,
                              const std::vector<double>& scale) {
    NullMoments m;
    m.k = k;
    m.alphas.resize(k);
    m.second.resize(k, k);
    for (int i = 1; i <= k; ++i) {
        double acc = 0.0;
        for (const auto& term : splits[static_cast<std::size_t>(i)]) {
            acc += term.coefficient * ym.first[static_cast<std::size_t>(term.s)] *
                   zm.first[static_cast<std::size_t>(i - term.s)];
        }
        m.alphas(i - 1) = scale[static_cast<std::size_t>(i)] * acc;
    }
    for (int i = 1; i <= k; ++i) {
        for (int j = i; j <= k; ++j) {
            double acc = 0.0;
            for (const auto& ti : splits[static_cast<std::size_t>(i)]) {
                for (const auto& tj : splits[static_cast<std::size_t>(j)]) {
                    acc += ti.coefficient * tj.coefficient * ym.second(ti.s, tj.s) *
                           zm.second(i - ti.s, j - tj.s);
                }
            }
            const double v = scale[static_cast<std::size_t>(i)] * scale[static_cast<std::size_t>(j)] * acc;
            m.second(i - 1, j - 1) = v;
            m.second(j - 1, i - 1) = v;
        }
    }
    m.alpha_stderr = Eigen::VectorXd::Zero(k);
    m.second_stderr = Eigen::MatrixXd::Zero(k, k);
    m.method = Method::ClosedForm;
    return m;
}

void check_split(double u) {
    if (!(u > 0.0 && u < 1.0)) {
        throw DomainError("addition split u must lie in (0, 1)");
    }
}

NullMoments laguerre_closed_form(const NullSpec& null, int k, const CoefficientOptions& options) {
    const double u = options.u_split;
    check_split(u);
    const double v = 1.0 - u;
    const int d = null.basis->max_degree();

    // E_{s,u}(x) = L_{s,u}(x) e^{-x}; second moments carry e^{-2x}. The
    // unscaled family keeps the integrands O(1) for the absolute tolerance.
    auto laguerre_component = [d](double shape) {
        return [d, shape](double x, std::vector<double>& phi, double& w1, double& w2) {
            for (int s = 0; s <= d; ++s) {
                phi[static_cast<std::size_t>(s)] = orthopoly::eval_laguerre(s, shape, x);
            }
            w1 = std::exp(-x);
            w2 = w1 * w1;
        };
    };
    const SplitMoments ym = split_moments(null.y_law, d, 0.1 * options.tolerance, laguerre_component(u));
    const SplitMoments zm = split_moments(null.z_law, d, 0.1 * options.tolerance, laguerre_component(v));

    std::vector<std::vector<orthopoly::SplitTerm>> splits(static_cast<std::size_t>(k) + 1);
    std::vector<double> scale(static_cast<std::size_t>(k) + 1);
    const auto norms = null.basis->norms();
    for (int i = 0; i <= k; ++i) {
        auto terms = orthopoly::addition_split_laguerre(i, u, v);
        // L~_{s,u} = u^{-s} s! L_{s,u}
        for (auto& t : terms) {
            t.coefficient *= factorial(t.s) * factorial(i - t.s) / (std::pow(u, t.s) * std::pow(v, i - t.s));
        }
        splits[static_cast<std::size_t>(i)] = std::move(terms);
        // Q_i = L_{i,1} / norm_i = L~_{i,1} / (i! norm_i)
        scale[static_cast<std::size_t>(i)] = 1.0 / (factorial(i) * norms[static_cast<std::size_t>(i)]);
    }
    return split_closed_form(k, ym, zm, splits, scale);
}

NullMoments meixner_closed_form(const NullSpec& null, int k, const CoefficientOptions& options) {
    if (null.basis->meixner_definition() != orthopoly::MeixnerDefinition::RecurrenceSeed) {
        throw NumericalError("Meixner closed form needs the recurrence-seeded basis");
    }
    const double u = options.u_split;
    check_split(u);
    const double v = 1.0 - u;
    const double p = null.ref.p;
    const int d = null.basis->max_degree();

    // E_{s,u}(x) = M_{s;u,p}(x) p^x (1-p)^{1/2}; second moments M_s M_t p^{2x} (1-p).
    auto meixner_component = [d, p](double beta) {
        return [d, p, beta](double x, std::vector<double>& phi, double& w1, double& w2) {
            for (int s = 0; s <= d; ++s) {
                phi[static_cast<std::size_t>(s)] = orthopoly::eval_meixner_general(s, beta, p, x);
            }
            const double px = std::pow(p, x);
            w1 = px * std::sqrt(1.0 - p);
            w2 = px * px * (1.0 - p);
        };
    };
    const SplitMoments ym = split_moments(null.y_law, d, 0.1 * options.tolerance, meixner_component(u));
    const SplitMoments zm = split_moments(null.z_law, d, 0.1 * options.tolerance, meixner_component(v));

    std::vector<std::vector<orthopoly::SplitTerm>> splits(static_cast<std::size_t>(k) + 1);
    std::vector<double> scale(static_cast<std::size_t>(k) + 1);
    const auto norms = null.basis->norms();
    for (int i = 0; i <= k; ++i) {
        splits[static_cast<std::size_t>(i)] = orthopoly::addition_split_meixner(i, u, v, p);
        scale[static_cast<std::size_t>(i)] = 1.0 / norms[static_cast<std::size_t>(i)];
    }
    return split_closed_form(k, ym, zm, splits, scale);
}

/// Monomial coefficients of the orthonormal shifted Legendre polynomials, degree 0..d.
std::vector<std::vector<long double>> legendre_monomials(const orthopoly::BasisTable& basis, int d) {
    std::vector<std::vector<long double>> raw(static_cast<std::size_t>(d) + 1);
    raw[0] = {1.0L};
    if (d >= 1) {
        raw[1] = {-1.0L, 2.0L};
    }
    for (int n = 1; n < d; ++n) {
        // (n+1) P_{n+1} = (2n+1)(2x-1) P_n - n P_{n-1}
        std::vector<long double> next(static_cast<std::size_t>(n) + 2, 0.0L);
        const auto& cur = raw[static_cast<std::size_t>(n)];
        const auto& prev = raw[static_cast<std::size_t>(n) - 1];
        for (std::size_t m = 0; m < cur.size(); ++m) {
            next[m + 1] += 2.0L * (2 * n + 1) * cur[m];
            next[m] -= static_cast<long double>(2 * n + 1) * cur[m];
        }
        for (std::size_t m = 0; m < prev.size(); ++m) {
            next[m] -= static_cast<long double>(n) * prev[m];
        }
        for (auto& c : next) {
            c /= (n + 1);
        }
        raw[static_cast<std::size_t>(n) + 1] = std::move(next);
    }
    const auto norms = basis.norms();
    for (int n = 0; n <= d; ++n) {
        for (auto& c : raw[static_cast<std::size_t>(n)]) {
            c /= norms[static_cast<std::size_t>(n)];
        }
    }
    return raw;
}

NullMoments legendre_closed_form(const NullSpec& null, int k, const CoefficientOptions& options) {
    const int d = null.basis->max_degree();
    const int top = 2 * d;
    const measures::VectorIntegrand powers = [top](double x) {
        Eigen::VectorXd out(top + 1);
        double v = 1.0;
        for (int s = 0; s <= top; ++s) {
            out(s) = v;
            v *= x;
        }
        return out;
    };
    const Eigen::VectorXd my = measures::expect_1d(null.y_law, powers, top + 1, 0.1 * options.tolerance);
    const Eigen::VectorXd mz = measures::expect_1d(null.z_law, powers, top + 1, 0.1 * options.tolerance);
    const auto q = legendre_monomials(*null.basis, k);

    // C_{i,s,t} = q_{i,s+t} binom(s+t, s)
    auto coefficient = [&q](int i, int s, int t) {
        return q[static_cast<std::size_t>(i)][static_cast<std::size_t>(s + t)] *
               static_cast<long double>(orthopoly::binomial(s + t, s));
    };

    NullMoments m;
    m.k = k;
    m.alphas.resize(k);
    m.second.resize(k, k);
    for (int i = 1; i <= k; ++i) {
        long double acc = 0.0L;
        for (int s = 0; s <= i; ++s) {
            for (int t = 0; s + t <= i; ++t) {
                acc += coefficient(i, s, t) * my(s) * mz(t);
            }
        }
        m.alphas(i - 1) = static_cast<double>(acc);
    }
    for (int i = 1; i <= k; ++i) {
        for (int j = i; j <= k; ++j) {
            long double acc = 0.0L;
            for (int s = 0; s <= i; ++s) {
                for (int t = 0; s + t <= i; ++t) {
                    const long double ci = coefficient(i, s, t);
                    for (int a = 0; a <= j; ++a) {
                        for (int b = 0; a + b <= j; ++b) {
                            acc += ci * coefficient(j, a, b) * my(s + a) * mz(t + b);
                        }
                    }
                }
            }
            m.second(i - 1, j - 1) = m.second(j - 1, i - 1) = static_cast<double>(acc);
        }
    }
    m.alpha_stderr = Eigen::VectorXd::Zero(k);
    m.second_stderr = Eigen::MatrixXd::Zero(k, k);
    m.method = Method::ClosedForm;
    return m;
}

}  // namespace

JointLaw noise_coupled(const DistributionSpec& y_law, const DistributionSpec& z_law, double coupling) {
    if (!(coupling >= 0.0) || !std::isfinite(coupling)) {
        throw DomainError("noise coupling must be finite and nonnegative");
    }
    std::ostringstream name;
    name.precision(17);
    name << "noise_coupled(" << coupling << ")";
    return JointLaw{name.str(), [y_law, z_law, coupling](measures::RngStream& rng) {
                        const double z = measures::sample_one(z_law, rng);
                        const double y0 = measures::sample_one(y_law, rng);
                        return std::pair{y0 + coupling * z, z};
                    }};
}

NullSpec make_null(DistributionSpec y_law, DistributionSpec z_law, ReferenceMeasureSpec ref, int max_degree,
                   Dependence dependence) {
    orthopoly::PolynomialFamilySpec family;
    switch (ref.kind) {
        case ReferenceKind::Exponential1:
            family = orthopoly::PolynomialFamilySpec::laguerre(1.0, max_degree);
            break;
        case ReferenceKind::Uniform01:
            family = orthopoly::PolynomialFamilySpec::shifted_legendre(max_degree);
            break;
        case ReferenceKind::Geometric:
            family = orthopoly::PolynomialFamilySpec::meixner(ref.p, max_degree);
            break;
    }
    auto basis = std::make_shared<const orthopoly::BasisTable>(orthopoly::certify_orthonormality(family));
    NullSpec null{std::move(y_law), std::move(z_law), std::move(dependence), ref, std::move(basis)};
    validate(null);
    return null;
}

void validate(const NullSpec& null) {
    if (!null.basis) {
        throw DomainError("null has no basis");
    }
    const auto& fam = null.basis->family();
    bool match = false;
    switch (null.ref.kind) {
        case ReferenceKind::Exponential1:
            match = fam.kind == Family::GeneralizedLaguerre && fam.shape == 1.0;
            break;
        case ReferenceKind::Uniform01:
            match = fam.kind == Family::ShiftedLegendre;
            break;
        case ReferenceKind::Geometric:
            match = fam.kind == Family::Meixner && fam.shape == null.ref.p;
            break;
    }
    if (!match) {
        throw DomainError("basis family does not match the reference measure " + measures::to_string(null.ref));
    }

    const double lower = null.y_law.support_lower() + null.z_law.support_lower();
    const double upper = null.y_law.support_upper() + null.z_law.support_upper();
    const std::string laws = null.y_law.describe() + " + " + null.z_law.describe();
    switch (null.ref.kind) {
        case ReferenceKind::Exponential1:
            if (lower < 0.0) {
                throw DomainError("support of " + laws + " extends below 0");
            }
            break;
        case ReferenceKind::Uniform01:
            if (lower < 0.0 || upper > 1.0) {
                throw DomainError("support of " + laws + " leaves [0, 1]");
            }
            break;
        case ReferenceKind::Geometric:
            if (!null.y_law.is_integer_valued() || !null.z_law.is_integer_valued()) {
                throw DomainError("geometric reference needs integer-valued Y and Z, got " + laws);
            }
            break;
    }
}

double sample_x(const NullSpec& null, measures::RngStream& rng) {
    if (const auto* joint = std::get_if<JointLaw>(&null.dependence)) {
        const auto [y, z] = joint->sampler(rng);
        return y + z;
    }
    const double y = measures::sample_one(null.y_law, rng);
    const double z = measures::sample_one(null.z_law, rng);
    return y + z;
}

std::vector<double> sample_x(const NullSpec& null, measures::RngStream& rng, std::size_t count) {
    std::vector<double> out(count);
    for (auto& v : out) {
        v = sample_x(null, rng);
    }
    return out;
}

std::string to_string(Method method) {
    switch (method) {
        case Method::ClosedForm:
            return "closed_form";
        case Method::Quadrature:
            return "quadrature";
        case Method::MonteCarlo:
            return "monte_carlo";
    }
    return "unknown";
}

Method default_method(const NullSpec& null) { return null.independent() ? Method::ClosedForm : Method::MonteCarlo; }

NullMoments compute_moments(const NullSpec& null, int k, const CoefficientOptions& options) {
    check_order(null, k);
    const Method method = options.method.value_or(default_method(null));
    if (method != Method::MonteCarlo && !null.independent()) {
        throw DomainError(to_string(method) + " coefficients need independent Y and Z; use monte_carlo");
    }
    switch (method) {
        case Method::ClosedForm:
            switch (null.ref.kind) {
                case ReferenceKind::Exponential1:
                    return laguerre_closed_form(null, k, options);
                case ReferenceKind::Uniform01:
                    return legendre_closed_form(null, k, options);
                case ReferenceKind::Geometric:
                    return meixner_closed_form(null, k, options);
            }
            break;
        case Method::Quadrature:
            return quadrature_moments(null, k, options);
        case Method::MonteCarlo:
            return monte_carlo_moments(null, k, options);
    }
    throw DomainError("unknown coefficient method");
}

NullCoefficients coefficients_from_moments(const NullMoments& moments, std::string provenance) {
    const int k = moments.k;
    NullCoefficients c;
    c.k = k;
    c.alphas = moments.alphas;
    c.method = moments.method;
    c.provenance = std::move(provenance);
    c.sigma.resize(k, k);
    for (int i = 0; i < k; ++i) {
        for (int j = i; j < k; ++j) {
            const double v = moments.second(i, j) - moments.alphas(i) * moments.alphas(j);
            c.sigma(i, j) = v;
            c.sigma(j, i) = v;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(c.sigma, Eigen::EigenvaluesOnly);
    c.min_eigen = solver.eigenvalues()(0);
    if (c.min_eigen < -kPsdSlack) {
        std::ostringstream os;
        os << "covariance matrix has eigenvalue " << c.min_eigen << " below -" << kPsdSlack;
        throw NumericalError(os.str());
    }
    c.psd_clip = c.min_eigen < 0.0 ? -c.min_eigen : 0.0;
    return c;
}

NullCoefficients compute_coefficients(const NullSpec& null, int k, const CoefficientOptions& options) {
    const NullMoments moments = compute_moments(null, k, options);
    std::ostringstream prov;
    prov.precision(17);
    prov << to_string(moments.method) << "; Y ~ " << null.y_law.describe() << ", Z ~ " << null.z_law.describe();
    if (const auto* joint = std::get_if<JointLaw>(&null.dependence)) {
        prov << ", joint law " << joint->name;
    }
    prov << "; reference " << measures::to_string(null.ref) << "; basis: " << null.basis->provenance();
    switch (moments.method) {
        case Method::ClosedForm:
            prov << "; addition split u = " << options.u_split;
            break;
        case Method::Quadrature:
            prov << "; tolerance " << options.tolerance;
            break;
        case Method::MonteCarlo:
            prov << "; " << options.mc_draws << " draws, seed " << options.mc_seed;
            break;
    }
    return coefficients_from_moments(moments, prov.str());
}

Eigen::VectorXd compute_alphas(const NullSpec& null, int k, const CoefficientOptions& options) {
    return compute_moments(null, k, options).alphas;
}

Eigen::MatrixXd compute_sigma(const NullSpec& null, int k, const CoefficientOptions& options) {
    return compute_coefficients(null, k, options).sigma;
}

NullCoefficients NullCoefficients::leading(int order) const {
    if (order < 1 || order > k) {
        throw DomainError("leading order must lie in [1, k]");
    }
    NullCoefficients c;
    c.k = order;
    c.alphas = alphas.head(order);
    c.sigma = sigma.topLeftCorner(order, order);
    c.method = method;
    c.provenance = provenance;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(c.sigma, Eigen::EigenvaluesOnly);
    c.min_eigen = solver.eigenvalues()(0);
    c.psd_clip = c.min_eigen < 0.0 ? -c.min_eigen : 0.0;
    return c;
}

EigenDiagnostics eigen_floor_diagnostics(const Eigen::MatrixXd& sigma, double condition_cap) {
    EigenDiagnostics d;
    const auto k = sigma.rows();
    bool usable = true;
    for (Eigen::Index order = 1; order <= k; ++order) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sigma.topLeftCorner(order, order),
                                                              Eigen::EigenvaluesOnly);
        const double lo = solver.eigenvalues()(0);
        const double hi = solver.eigenvalues()(order - 1);
        const double cond = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
        d.lambda_min.push_back(lo);
        d.lambda_max.push_back(hi);
        d.condition.push_back(cond);
        usable = usable && cond < condition_cap;
        if (usable) {
            d.usable_k = static_cast<int>(order);
        }
    }
    return d;
}

EigenDiagnostics eigen_floor_diagnostics(const NullCoefficients& coeffs, double condition_cap) {
    return eigen_floor_diagnostics(coeffs.sigma, condition_cap);
}

}  // namespace deconv::nullmodel
