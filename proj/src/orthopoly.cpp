#include "deconv/orthopoly.hpp"

#include "deconv/error.hpp"
#include "deconv/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace deconv::orthopoly {

namespace {

struct RawStep {
    double a;
    double b;
    double c;
};

void check_degree(int degree) {
    if (degree < 0) {
        throw DomainError("polynomial degree must be nonnegative");
    }
    if (degree > kDegreeCap) {
        std::ostringstream os;
        os << "polynomial degree " << degree << " exceeds cap " << kDegreeCap;
        throw DegreeOverflowError(os.str());
    }
}

void check_meixner_parameter(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw DomainError("Meixner parameter p must lie in (0, 1)");
    }
}

// P_{n+1} = (a x + b) P_n - c P_{n-1}
RawStep laguerre_step(int n, double alpha) {
    const double m = n + 1.0;
    return {-1.0 / m, (2.0 * n + alpha) / m, (n + alpha - 1.0) / m};
}

RawStep laguerre_scaled_step(int n, double alpha) {
    return {-1.0 / alpha, (2.0 * n + alpha) / alpha, n * (n + alpha - 1.0) / (alpha * alpha)};
}

RawStep legendre_step(int n) {
    const double m = n + 1.0;
    return {2.0 * (2.0 * n + 1.0) / m, -(2.0 * n + 1.0) / m, n / m};
}

RawStep meixner_step(int n, double beta, double c) {
    const double r = (1.0 - c) / c;
    return {-(1.0 - c) * r, (n + (n + beta) * c) * r, n * (n - 1.0 + beta) * (1.0 - c) * r};
}

RawStep meixner_printed_seed_step(int n, double p) {
    if (n == 0) {
        return {-1.0 / p, 1.0 - p, 0.0};
    }
    return meixner_step(n, 1.0, p);
}

template <typename StepFn>
double run_recurrence(int degree, double x, StepFn step) {
    double prev = 0.0;
    double cur = 1.0;
    for (int n = 0; n < degree; ++n) {
        const RawStep s = step(n);
        const double next = (s.a * x + s.b) * cur - s.c * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

RawStep family_step(const PolynomialFamilySpec& family, MeixnerDefinition def, int n) {
    switch (family.kind) {
        case Family::GeneralizedLaguerre:
            return laguerre_step(n, family.shape);
        case Family::ShiftedLegendre:
            return legendre_step(n);
        case Family::Meixner:
            return def == MeixnerDefinition::PrintedSeed ? meixner_printed_seed_step(n, family.shape)
                                                         : meixner_step(n, 1.0, family.shape);
    }
    return {0.0, 0.0, 0.0};
}

struct GramResult {
    std::vector<double> norms;
    double max_error = 0.0;
    int worst_i = 0;
    int worst_j = 0;
    std::string method;
};

GramResult gram(const PolynomialFamilySpec& family, MeixnerDefinition def) {
    const int d = family.max_degree;
    const auto size = static_cast<std::size_t>(d + 1);
    std::vector<double> g(size * size, 0.0);
    std::vector<double> vals(size);

    auto eval_all = [&](double x) {
        double prev = 0.0;
        double cur = 1.0;
        vals[0] = 1.0;
        for (int n = 0; n < d; ++n) {
            const RawStep s = family_step(family, def, n);
            const double next = (s.a * x + s.b) * cur - s.c * prev;
            prev = cur;
            cur = next;
            vals[static_cast<std::size_t>(n) + 1] = cur;
        }
    };
    auto accumulate = [&](double w) {
        for (std::size_t i = 0; i < size; ++i) {
            for (std::size_t j = 0; j <= i; ++j) {
                g[i * size + j] += w * vals[i] * vals[j];
            }
        }
    };

    GramResult out;
    std::ostringstream method;
    if (family.kind == Family::Meixner) {
        const double p = family.shape;
        // Sum until the weighted squares of every degree are negligible for a run of points.
        int quiet = 0;
        long x = 0;
        constexpr long kMaxTerms = 2'000'000;
        for (; x < kMaxTerms && quiet < 16; ++x) {
            const double w = (1.0 - p) * std::pow(p, static_cast<double>(x));
            eval_all(static_cast<double>(x));
            accumulate(w);
            bool negligible = x > 2 * d;
            for (std::size_t i = 0; i < size && negligible; ++i) {
                negligible = w * vals[i] * vals[i] <= 1e-20 * g[i * size + i];
            }
            quiet = negligible ? quiet + 1 : 0;
        }
        method << "truncated sum over x = 0.." << (x - 1);
    } else {
        const int points = d + 12;
        const measures::GaussRule rule = family.kind == Family::GeneralizedLaguerre
                                              ? measures::gauss_laguerre(points, family.shape)
                                              : measures::gauss_legendre_unit(points);
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            eval_all(rule.nodes[q]);
            accumulate(rule.weights[q]);
        }
        method << points << "-point Gauss "
               << (family.kind == Family::GeneralizedLaguerre ? "Laguerre" : "Legendre") << " rule";
    }
    out.method = method.str();

    out.norms.resize(size);
    for (std::size_t i = 0; i < size; ++i) {
        out.norms[i] = std::sqrt(g[i * size + i]);
    }
    for (std::size_t i = 0; i < size; ++i) {
        if (!(out.norms[i] > 0.0) || !std::isfinite(out.norms[i])) {
            out.max_error = std::numeric_limits<double>::infinity();
            out.worst_i = out.worst_j = static_cast<int>(i);
            return out;
        }
        for (std::size_t j = 0; j < i; ++j) {
            const double e = std::abs(g[i * size + j]) / (out.norms[i] * out.norms[j]);
            if (e > out.max_error) {
                out.max_error = e;
                out.worst_i = static_cast<int>(j);
                out.worst_j = static_cast<int>(i);
            }
        }
    }
    return out;
}

}  // namespace

std::string to_string(Family family) {
    switch (family) {
        case Family::GeneralizedLaguerre:
            return "laguerre";
        case Family::ShiftedLegendre:
            return "shifted_legendre";
        case Family::Meixner:
            return "meixner";
    }
    return "unknown";
}

PolynomialFamilySpec PolynomialFamilySpec::laguerre(double alpha, int max_degree) {
    PolynomialFamilySpec spec{Family::GeneralizedLaguerre, alpha, max_degree};
    spec.validate();
    return spec;
}

PolynomialFamilySpec PolynomialFamilySpec::shifted_legendre(int max_degree) {
    PolynomialFamilySpec spec{Family::ShiftedLegendre, 1.0, max_degree};
    spec.validate();
    return spec;
}

PolynomialFamilySpec PolynomialFamilySpec::meixner(double p, int max_degree) {
    PolynomialFamilySpec spec{Family::Meixner, p, max_degree};
    spec.validate();
    return spec;
}

void PolynomialFamilySpec::validate() const {
    check_degree(max_degree);
    if (kind == Family::Meixner) {
        check_meixner_parameter(shape);
    } else if (kind == Family::GeneralizedLaguerre && !(shape > 0.0)) {
        throw DomainError("Laguerre shape must be positive");
    }
}

double eval_laguerre(int degree, double alpha, double x) {
    check_degree(degree);
    if (!(alpha > 0.0)) {
        throw DomainError("Laguerre shape must be positive");
    }
    return run_recurrence(degree, x, [alpha](int n) { return laguerre_step(n, alpha); });
}

double eval_laguerre_scaled(int degree, double alpha, double x) {
    check_degree(degree);
    if (!(alpha > 0.0)) {
        throw DomainError("Laguerre shape must be positive");
    }
    return run_recurrence(degree, x, [alpha](int n) { return laguerre_scaled_step(n, alpha); });
}

double eval_shifted_legendre(int degree, double x) {
    check_degree(degree);
    if (!(x >= 0.0 && x <= 1.0)) {
        throw DomainError("shifted Legendre argument must lie in [0, 1]");
    }
    return run_recurrence(degree, x, [](int n) { return legendre_step(n); });
}

double eval_meixner(int degree, double p, double x) {
    return eval_meixner_general(degree, 1.0, p, x);
}

double eval_meixner_general(int degree, double beta, double c, double x) {
    check_degree(degree);
    check_meixner_parameter(c);
    if (!(beta > 0.0)) {
        throw DomainError("Meixner beta must be positive");
    }
    return run_recurrence(degree, x, [beta, c](int n) { return meixner_step(n, beta, c); });
}

double eval_meixner_printed_seed(int degree, double p, double x) {
    check_degree(degree);
    check_meixner_parameter(p);
    return run_recurrence(degree, x, [p](int n) { return meixner_printed_seed_step(n, p); });
}

double BasisTable::raw(int degree, double x) const {
    check_degree(degree);
    if (degree > family_.max_degree) {
        std::ostringstream os;
        os << "degree " << degree << " requested from a basis certified to " << family_.max_degree;
        throw DegreeOverflowError(os.str());
    }
    return run_recurrence(degree, x, [this](int n) { return family_step(family_, meixner_definition_, n); });
}

double BasisTable::value(int degree, double x) const {
    return raw(degree, x) / norms_[static_cast<std::size_t>(degree)];
}

void BasisTable::values(double x, std::span<double> out) const {
    if (out.empty()) {
        return;
    }
    if (out.size() > norms_.size()) {
        std::ostringstream os;
        os << "requested " << out.size() - 1 << " degrees from a basis certified to " << family_.max_degree;
        throw DegreeOverflowError(os.str());
    }
    double prev = 0.0;
    double cur = 1.0 / norms_[0];
    out[0] = cur;
    for (std::size_t n = 0; n + 1 < out.size(); ++n) {
        const Step& s = steps_[n];
        const double next = (s.a * x + s.b) * cur - s.c * prev;
        prev = cur;
        cur = next;
        out[n + 1] = cur;
    }
}

bool BasisTable::in_support(double x) const noexcept {
    switch (family_.kind) {
        case Family::GeneralizedLaguerre:
            return x >= 0.0 && std::isfinite(x);
        case Family::ShiftedLegendre:
            return x >= 0.0 && x <= 1.0;
        case Family::Meixner:
            return x >= 0.0 && std::isfinite(x) && x == std::floor(x);
    }
    return false;
}

BasisTable certify_orthonormality(const PolynomialFamilySpec& family) {
    family.validate();

    std::vector<MeixnerDefinition> attempts{MeixnerDefinition::RecurrenceSeed};
    if (family.kind == Family::Meixner) {
        attempts = {MeixnerDefinition::PrintedSeed, MeixnerDefinition::RecurrenceSeed};
    }

    std::ostringstream provenance;
    switch (family.kind) {
        case Family::GeneralizedLaguerre:
            provenance << "generalized Laguerre, alpha = " << family.shape << ", forward recurrence";
            break;
        case Family::ShiftedLegendre:
            provenance << "shifted Legendre P_n(2x - 1)";
            break;
        case Family::Meixner:
            provenance << "Meixner b = 1, c = " << family.shape;
            break;
    }

    GramResult result;
    for (std::size_t attempt = 0; attempt < attempts.size(); ++attempt) {
        const MeixnerDefinition def = attempts[attempt];
        result = gram(family, def);
        const bool ok = result.max_error < kGramTolerance;
        if (family.kind == Family::Meixner) {
            provenance << (def == MeixnerDefinition::PrintedSeed ? "; closed-form M_1 = 1 - p - x/p"
                                                                 : "; M_1 from recurrence step n = 0")
                       << (ok ? " certified" : " rejected") << " (max Gram error " << result.max_error << " at ("
                       << result.worst_i << ", " << result.worst_j << "))";
        }
        if (!ok) {
            continue;
        }
        BasisTable table;
        table.family_ = family;
        table.meixner_definition_ = def;
        table.norms_ = result.norms;
        table.max_gram_error_ = result.max_error;
        provenance << "; norms by " << result.method;
        table.provenance_ = provenance.str();
        table.steps_.resize(static_cast<std::size_t>(family.max_degree));
        const auto& h = table.norms_;
        for (int n = 0; n < family.max_degree; ++n) {
            const RawStep s = family_step(family, def, n);
            const auto un = static_cast<std::size_t>(n);
            const double scale = h[un] / h[un + 1];
            table.steps_[un] = {s.a * scale, s.b * scale, n > 0 ? s.c * h[un - 1] / h[un + 1] : 0.0};
        }
        return table;
    }

    std::ostringstream os;
    os << "orthonormality certificate failed for " << to_string(family.kind) << " (shape " << family.shape
       << ", degree " << family.max_degree << "): Gram entry (" << result.worst_i << ", " << result.worst_j
       << ") = " << result.max_error;
    throw BasisInconsistencyError(os.str(), result.worst_i, result.worst_j);
}

double binomial(int n, int k) {
    if (k < 0 || k > n) {
        return 0.0;
    }
    k = std::min(k, n - k);
    double r = 1.0;
    for (int i = 1; i <= k; ++i) {
        r = r * (n - k + i) / i;
    }
    return std::round(r);
}

std::vector<SplitTerm> addition_split_laguerre(int n, double u, double v) {
    check_degree(n);
    if (!(u > 0.0) || !(v > 0.0)) {
        throw DomainError("Laguerre addition split needs u > 0 and v > 0");
    }
    const double a = u + v;
    std::vector<SplitTerm> terms;
    terms.reserve(static_cast<std::size_t>(n) + 1);
    for (int s = 0; s <= n; ++s) {
        terms.push_back({s, binomial(n, s) * std::pow(u / a, s) * std::pow(v / a, n - s)});
    }

    for (const double y : {0.0, 0.6, 2.3}) {
        for (const double z : {0.0, 1.1, 4.0}) {
            const double lhs = eval_laguerre_scaled(n, a, y + z);
            double rhs = 0.0;
            for (const auto& t : terms) {
                rhs += t.coefficient * eval_laguerre_scaled(t.s, u, y) * eval_laguerre_scaled(n - t.s, v, z);
            }
            if (std::abs(lhs - rhs) > 1e-8 * (1.0 + std::abs(lhs))) {
                throw BasisInconsistencyError("Laguerre addition identity failed", n, -1);
            }
        }
    }
    return terms;
}

std::vector<SplitTerm> addition_split_meixner(int n, double u, double v, double p) {
    check_degree(n);
    check_meixner_parameter(p);
    if (!(u > 0.0) || !(v > 0.0)) {
        throw DomainError("Meixner addition split needs u > 0 and v > 0");
    }
    if (std::abs(u + v - 1.0) > 1e-12) {
        throw DomainError("Meixner addition split needs u + v = 1");
    }
    std::vector<SplitTerm> terms;
    terms.reserve(static_cast<std::size_t>(n) + 1);
    for (int s = 0; s <= n; ++s) {
        terms.push_back({s, binomial(n, s)});
    }

    for (const double y : {0.0, 1.0, 3.0}) {
        for (const double z : {0.0, 2.0, 5.0}) {
            const double lhs = eval_meixner(n, p, y + z);
            double rhs = 0.0;
            for (const auto& t : terms) {
                rhs += t.coefficient * eval_meixner_general(t.s, u, p, y) *
                       eval_meixner_general(n - t.s, v, p, z);
            }
            if (std::abs(lhs - rhs) > 1e-8 * (1.0 + std::abs(lhs))) {
                throw BasisInconsistencyError("Meixner addition identity failed", n, -1);
            }
        }
    }
    return terms;
}

}  // namespace deconv::orthopoly
